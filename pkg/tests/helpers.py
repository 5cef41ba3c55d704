from fractions import Fraction

from vetocore.election import Domain, WeightVector, plurality_weights, unit_voter_weights


def plurality_pair(e):
    """Unit voter weights and plurality candidate weights: both total n."""
    return unit_voter_weights(e), plurality_weights(e)


def voter_weights(e, values):
    return WeightVector(Domain.VOTERS, dict(zip(e.voters, map(Fraction, values))))


def candidate_weights(e, values):
    return WeightVector(Domain.CANDIDATES, dict(zip(e.candidates, map(Fraction, values))))
