"""Metric distortion of a candidate, computed exactly by linear programming.

Only voter-candidate distances are modelled. A distance function is admissible for an election
when every voter is closer to the candidates it ranks higher, and the relaxed triangle
inequality  d(v,c) <= d(v,c') + d(v',c') + d(v',c)  holds for all voters v, v' and candidates
c, c'. The distortion of c is the largest cost(c) / cost(x) over admissible distances and
reference candidates x.
"""

import logging
import math
from fractions import Fraction
from itertools import pairwise

import attrs
import numpy as np

from vetocore.config import Config
from vetocore.election import Candidate, Election, Voter
from vetocore.errors import SizeLimitError
from vetocore.simplex import LPStatus, SimplexTableau

logger = logging.getLogger(__name__)

INFINITY = math.inf


@attrs.frozen
class VoterCandidateMetric:
    d: dict[tuple[Voter, Candidate], Fraction] = attrs.field(
        converter=lambda d: {k: Fraction(v) for k, v in dict(d).items()},
    )

    @d.validator
    def _check_non_negative(self, attribute, value):
        for key, distance in value.items():
            if distance < 0:
                raise ValueError(f"distance {key!r} is negative ({distance})")

    def __getitem__(self, key: tuple[Voter, Candidate]) -> Fraction:
        return self.d[key]

    def is_consistent(self, e: Election) -> bool:
        """Every voter is at least as close to a candidate as to any candidate it ranks lower."""
        return all(
            self.d[(v, a)] <= self.d[(v, b)]
            for v, ranking in zip(e.voters, e.rankings)
            for a, b in pairwise(ranking)
        )

    def satisfies_relaxed_triangle(self, e: Election) -> bool:
        return not _violated_triangles(e, lambda v, c: self.d[(v, c)], Fraction(0))

    def ratio(self, e: Election, c: Candidate) -> Fraction | float | None:
        """cost(c) / min_x cost(x). INFINITY when the optimum costs 0 but c does not, None when both cost 0."""
        best = min(cost(e, self, x) for x in e.candidates)
        own = cost(e, self, c)
        if best == 0:
            return INFINITY if own > 0 else None
        return own / best


def cost(e: Election, d: VoterCandidateMetric, c: Candidate) -> Fraction:
    """Social cost: total distance of the voters to `c`."""
    e.check_candidate(c)
    return sum((d[(v, c)] for v in e.voters), Fraction(0))


def _variable(e: Election, v_index: int, c: Candidate) -> int:
    return v_index * e.m + e.candidates.index(c)


def _violated_triangles(e: Election, value, bound) -> list[dict[int, int]]:
    """Relaxed triangle rows  d(v,c) - d(v,c') - d(v',c') - d(v',c) <= 0  that `value` exceeds by more than `bound`.

    `value(v, c)` reads a point or a ray. Rows with v = v' or c = c' always hold and are skipped.
    """
    violated = []
    voters = list(enumerate(e.voters))
    for i, v in voters:
        for j, w in voters:
            if i == j:
                continue
            for c in e.candidates:
                for c2 in e.candidates:
                    if c == c2:
                        continue
                    lhs = value(v, c) - value(v, c2) - value(w, c2) - value(w, c)
                    if lhs > bound:
                        row: dict[int, int] = {}
                        for k, coefficient in (
                                (_variable(e, i, c), 1), (_variable(e, i, c2), -1),
                                (_variable(e, j, c2), -1), (_variable(e, j, c), -1)):
                            row[k] = row.get(k, 0) + coefficient
                        violated.append(row)
    return violated


def reference_ratio(e: Election, c: Candidate, x: Candidate, scale: Fraction | int = 1) -> Fraction | float:
    """Largest cost(c) over admissible distances with cost(x) at most `scale`; INFINITY if unbounded.

    Starts from the ranking-consistency rows and the normalisation row, then adds relaxed
    triangle rows that the current optimum (or unbounded ray) violates, until none is violated.
    """
    e.check_candidate(c)
    e.check_candidate(x)
    size = e.n * e.m
    tableau = SimplexTableau([1 if k % e.m == e.candidates.index(c) else 0 for k in range(size)])
    for i, ranking in enumerate(e.rankings):
        for a, b in pairwise(ranking):
            tableau.add_constraint({_variable(e, i, a): 1, _variable(e, i, b): -1}, 0)
    tableau.add_constraint({_variable(e, i, x): 1 for i in range(e.n)}, scale)

    rounds = 0
    while True:
        rounds += 1
        result = tableau.solve()
        point = result.point
        rows = _violated_triangles(e, lambda v, cand: point[_variable(e, e.index(v), cand)], 0)
        if result.status is LPStatus.UNBOUNDED:
            ray = result.ray
            rows += _violated_triangles(e, lambda v, cand: ray[_variable(e, e.index(v), cand)], 0)
        if not rows:
            logger.debug(f"LP({c}, {x}) solved after {rounds} rounds: {result.status.value}")
            return result.value if result.is_optimal else INFINITY
        for row in rows:
            tableau.add_constraint(row, 0)


def distortion(e: Election, c: Candidate, *, limit: int | None = None) -> Fraction | float:
    """Worst-case ratio between the cost of `c` and the cost of the best candidate.

    Exact rational, or INFINITY. An election with a single candidate has distortion 1.
    """
    e.check_candidate(c)
    limit = Config.MAX_LP_SIZE if limit is None else limit
    if e.n * e.m > limit:
        raise SizeLimitError(f"distortion LP is limited to n*m <= {limit}, got {e.n * e.m}")
    worst: Fraction | float = Fraction(1)
    for x in e.candidates:
        if x == c:
            continue
        value = reference_ratio(e, c, x)
        if value == INFINITY:
            return INFINITY
        worst = max(worst, value)
    return worst


def line_metric_instance(n: int, m: int, seed: int) -> tuple[Election, VoterCandidateMetric]:
    """Voters and candidates at random integer points of a line; rankings follow the distances.

    Ties in distance are broken by candidate order.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & ((1 << 64) - 1))))
    voter_points = rng.integers(0, 100, size=n)
    candidate_points = rng.integers(0, 100, size=m)
    candidates = tuple(f"c{k}" for k in range(1, m + 1))
    d: dict[tuple[Voter, Candidate], Fraction] = {}
    rankings = []
    for v in range(1, n + 1):
        distances = {c: Fraction(abs(int(voter_points[v - 1]) - int(candidate_points[k])))
                     for k, c in enumerate(candidates)}
        d.update(((v, c), dist) for c, dist in distances.items())
        rankings.append(sorted(candidates, key=lambda c: (distances[c], candidates.index(c))))
    return Election(candidates, rankings), VoterCandidateMetric(d)
