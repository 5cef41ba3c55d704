"""The (p,q)-veto core: membership by matchings, and a brute-force blocking-coalition oracle."""

import logging
from fractions import Fraction
from itertools import combinations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self

import attrs

from vetocore.config import Config
from vetocore.election import (
    Candidate, Domain, Election, Voter, WeightVector, check_weights,
)
from vetocore.errors import CertificateError, InvariantViolation, MarginalMismatchError, SizeLimitError
from vetocore.matching import HallViolation, Matching, find_admitted_matching

logger = logging.getLogger(__name__)


@attrs.frozen
class BlockingPair:
    """Coalition T and witness set B showing that T (p,q)-blocks `candidate`.

    Every voter of T ranks every member of B above the candidate, and
    margin = p(T) - (total - q(B)) is positive. Build through `create` so both are checked.
    """
    candidate: Candidate
    coalition: frozenset[Voter] = attrs.field(converter=frozenset)
    witness: frozenset[Candidate] = attrs.field(converter=frozenset)
    margin: Fraction = attrs.field(converter=Fraction)

    @margin.validator
    def _check_margin(self, attribute, value):
        if value <= 0:
            raise CertificateError(f"blocking margin must be positive, got {value}")

    @classmethod
    def create(
            cls, e: Election, p: WeightVector, q: WeightVector,
            candidate: Candidate, coalition, witness,
    ) -> 'Self':
        for v in coalition:
            for b in witness:
                if not e.prefers(v, b, candidate):
                    raise CertificateError(f"voter {v} does not rank {b} above {candidate}")
        margin = p.mass(coalition) - (q.total - q.mass(witness))
        return cls(candidate, coalition, witness, margin)

    @classmethod
    def from_hall_violation(
            cls, e: Election, p: WeightVector, q: WeightVector, violation: HallViolation,
    ) -> 'Self':
        """B = C minus N_a(T): the candidates every member of T ranks above the blocked one."""
        witness = frozenset(e.candidates) - violation.neighbourhood
        return cls.create(e, p, q, violation.candidate, violation.coalition, witness)

    def to_dict(self, e: Election) -> dict:
        return {
            'coalition': sorted(self.coalition),
            'witness': [c for c in e.candidates if c in self.witness],
            'margin': str(self.margin),
        }


def core_certificates(e: Election, p: WeightVector, q: WeightVector) -> dict[Candidate, Matching | BlockingPair]:
    """One certificate per candidate: an admitted matching for members, a blocking pair otherwise."""
    certificates: dict[Candidate, Matching | BlockingPair] = {}
    for a in e.candidates:
        result = find_admitted_matching(e, a, p, q)
        if isinstance(result, HallViolation):
            certificates[a] = BlockingPair.from_hall_violation(e, p, q, result)
        else:
            certificates[a] = result
    return certificates


def veto_core(e: Election, p: WeightVector, q: WeightVector) -> frozenset[Candidate]:
    """Candidates admitting some (p,q)-matching, which are exactly the unblocked ones."""
    core = frozenset(
        a for a in e.candidates
        if isinstance(find_admitted_matching(e, a, p, q), Matching)
    )
    if not core:
        raise InvariantViolation("the veto core is empty")
    logger.debug(f"veto core of n={e.n}, m={e.m}: {sorted(core)}")
    return core


def _check_coalition_limit(e: Election, limit: int | None) -> None:
    limit = Config.MAX_COALITION_VOTERS if limit is None else limit
    if e.n > limit:
        raise SizeLimitError(f"coalition enumeration is limited to n <= {limit}, got n={e.n}")


def _ranked_above(e: Election, a: Candidate) -> dict[Voter, frozenset[Candidate]]:
    return {v: frozenset(r[:e.position(v, a)]) for v, r in zip(e.voters, e.rankings)}


def find_blocking(
        e: Election, p: WeightVector, q: WeightVector, a: Candidate, *, limit: int | None = None,
) -> BlockingPair | None:
    """Search every non-empty coalition T, smallest first, for one that blocks `a`.

    For each T the witness is the largest possible B (everything T unanimously ranks above `a`).
    """
    e.check_candidate(a)
    _check_coalition_limit(e, limit)
    check_weights(e, p, Domain.VOTERS)
    check_weights(e, q, Domain.CANDIDATES)
    if p.total != q.total:
        raise MarginalMismatchError(f"p totals {p.total} but q totals {q.total}")

    above = _ranked_above(e, a)
    for size in range(1, e.n + 1):
        for coalition in combinations(e.voters, size):
            witness = frozenset.intersection(*(above[v] for v in coalition))
            if p.mass(coalition) > q.total - q.mass(witness):
                return BlockingPair.create(e, p, q, a, coalition, witness)
    return None


def is_prefix_intersecting(e: Election, s) -> tuple[bool, dict[Voter, int] | None]:
    """Whether `s` is an intersection of one top-k_v prefix per voter.

    The candidate indices are the smallest that can work: k_v is 1 + the lowest position of a
    member of `s` in v's ballot (0 for the empty set).
    """
    s = frozenset(s)
    for c in s:
        e.check_candidate(c)
    indices: dict[Voter, int] = {}
    result = set(e.candidates)
    for v, ranking in zip(e.voters, e.rankings):
        k = max(e.position(v, c) for c in s) + 1 if s else 0
        indices[v] = k
        result.intersection_update(ranking[:k])
    if result != s:
        return False, None
    return True, indices


def proportional_veto_core(e: Election, *, limit: int | None = None) -> frozenset[Candidate]:
    """The classical proportional veto core, straight from the coalition veto-power definition.

    A coalition T may veto up to ceil(m |T| / n) - 1 candidates, so it blocks c when the
    candidates it unanimously prefers to c leave at most that many others.
    """
    _check_coalition_limit(e, limit)
    core = set()
    for c in e.candidates:
        above = _ranked_above(e, c)
        blocked = False
        for size in range(1, e.n + 1):
            veto_power = -(-e.m * size // e.n) - 1
            for coalition in combinations(e.voters, size):
                preferred = frozenset.intersection(*(above[v] for v in coalition))
                if veto_power >= e.m - len(preferred):
                    blocked = True
                    break
            if blocked:
                break
        if not blocked:
            core.add(c)
    if not core:
        raise InvariantViolation("the proportional veto core is empty")
    return frozenset(core)
