"""Veto-by-consumption voting rules.

SerialVeto lets voters, one unit at a time, eat into the weight of their lowest remaining
candidate. SimultaneousVeto runs the same process in continuous time with every voter eating
at rate p(v). A candidate leaves the race only when its weight is 0 and some voter opposes it,
so zero-weight candidates nobody dislikes most can still win.
"""

import logging
from collections import Counter, defaultdict
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self

import attrs

from vetocore.config import Config
from vetocore.election import (
    Candidate, Domain, Election, Voter, WeightVector, check_weights, plurality_weights,
    unit_voter_weights,
)
from vetocore.errors import (
    InvalidMatchingError, InvariantViolation, MarginalMismatchError, SizeLimitError,
    VetoOrderError, WeightError,
)
from vetocore.matching import Matching, WinnerSet, is_valid_matching, tied_winners

logger = logging.getLogger(__name__)

SERIAL_VETO = 'serial-veto'
SIMULTANEOUS_VETO = 'simultaneous-veto'


@attrs.frozen
class VetoOrder:
    """A sequence of voters; voter v appears p(v) times."""
    sequence: tuple[Voter, ...] = attrs.field(converter=tuple)

    def __len__(self) -> int:
        return len(self.sequence)

    def __iter__(self) -> Iterator[Voter]:
        return iter(self.sequence)

    def multiplicities(self) -> Counter:
        return Counter(self.sequence)

    def check(self, e: Election, p: WeightVector | None = None) -> 'Self':
        """Raise VetoOrderError if the order names unknown voters or disagrees with `p`.

        `p` is compared after rescaling it to total len(order).
        """
        known = set(e.voters)
        for v in self.sequence:
            if v not in known:
                raise VetoOrderError(f"veto order names unknown voter {v!r}")
        if p is None:
            return self
        check_weights(e, p, Domain.VOTERS)
        if p.total == 0:
            if self.sequence:
                raise VetoOrderError("a non-empty veto order needs voter weights with positive total")
            return self
        expected = p.scaled(Fraction(len(self), p.total))
        counts = self.multiplicities()
        for v in e.voters:
            if expected[v] != counts[v]:
                raise VetoOrderError(f"voter {v} appears {counts[v]} times, expected {expected[v]}")
        return self


@attrs.frozen
class TraceEvent:
    time: Fraction
    eliminated: tuple[Candidate, ...] = attrs.field(converter=tuple)
    weights: dict[Candidate, Fraction]
    # who opposes each remaining candidate after the event; for eliminated ones, who eliminated it
    opposition: dict[Candidate, frozenset[Voter]]

    def to_dict(self) -> dict:
        return {
            'time': str(self.time),
            'eliminated': list(self.eliminated),
            'weights': {c: str(w) for c, w in self.weights.items()},
            'opposition': {c: sorted(vs) for c, vs in self.opposition.items()},
        }


@attrs.frozen
class EliminationTrace:
    events: tuple[TraceEvent, ...] = attrs.field(converter=tuple, factory=tuple)
    total: Fraction = attrs.field(converter=Fraction, default=0)

    @property
    def final_time(self) -> Fraction | None:
        return self.events[-1].time if self.events else None

    def elimination_times(self) -> dict[Candidate, Fraction]:
        return {c: event.time for event in self.events for c in event.eliminated}

    def to_dict(self) -> list[dict]:
        return [event.to_dict() for event in self.events]


@attrs.frozen
class RuleOutcome:
    rule: str
    winners: WinnerSet
    witness: Matching
    trace: EliminationTrace = attrs.field(factory=EliminationTrace)

    def to_dict(self, e: Election, *, trace: bool = True) -> dict:
        data = {
            'rule': self.rule,
            'winners': self.winners.ordered(e),
            'witness': self.witness.to_dict(e),
        }
        if trace:
            data['trace'] = self.trace.to_dict()
        return data


@attrs.frozen
class BottomTradingCycle:
    """Alternating voters and candidates (v1, c1, ..., vk, ck).

    Each vi holds weight on ci, and the lowest candidate of vi with positive q is c(i+1), cyclically.
    """
    sequence: tuple = attrs.field(converter=tuple)

    @sequence.validator
    def _check_alternating(self, attribute, value):
        if not value or len(value) % 2:
            raise InvalidMatchingError("a bottom trading cycle alternates voters and candidates")

    @property
    def pairs(self) -> list[tuple[Voter, Candidate]]:
        return list(zip(self.sequence[::2], self.sequence[1::2]))

    def __len__(self) -> int:
        return len(self.sequence) // 2


def _integral_weights(w: WeightVector, name: str) -> dict:
    if not w.is_integral():
        raise WeightError(f"{name} must be integral")
    return {k: int(v) for k, v in w.weights.items()}


def _check_process_weights(e: Election, p: WeightVector, q: WeightVector) -> None:
    check_weights(e, p, Domain.VOTERS)
    check_weights(e, q, Domain.CANDIDATES)
    if p.total != q.total:
        raise MarginalMismatchError(f"p totals {p.total} but q totals {q.total}")
    if p.total <= 0:
        raise WeightError("weight totals must be positive")


def _check_winners(e: Election, remaining: Iterable[Candidate], witness: Matching) -> WinnerSet:
    winners = tied_winners(e, witness)
    if winners.winners != frozenset(remaining):
        raise InvariantViolation(
            f"surviving candidates {sorted(remaining)} differ from the tied winners {sorted(winners.winners)}"
        )
    if not winners.winners:
        raise InvariantViolation("the rule produced no winner")
    return winners


def serial_veto(
        e: Election, q: WeightVector, order: VetoOrder | Sequence[Voter], p: WeightVector | None = None,
) -> RuleOutcome:
    """SerialVeto: each voter of `order` in turn removes one unit of weight from its lowest remaining candidate.

    Before its turn a voter first drops, one at a time, every lowest remaining candidate that
    has no weight left. q is rescaled to total N = len(order) and must then be integral. The
    witness records which candidate each turn decremented, on the original scale of q.
    """
    order = order if isinstance(order, VetoOrder) else VetoOrder(order)
    order.check(e, p)
    check_weights(e, q, Domain.CANDIDATES)
    size = len(order)
    if size and q.total == 0:
        raise WeightError("candidate weights must have positive total")
    if not size and q.total != 0:
        raise VetoOrderError(f"an empty veto order cannot consume candidate weight {q.total}")
    scaled = q.scaled(Fraction(size, q.total)) if size else q
    weight = _integral_weights(scaled, f"q rescaled to total {size}")

    remaining = set(e.candidates)
    counts: dict[tuple[Voter, Candidate], int] = defaultdict(int)
    for v in order:
        while True:
            bottom = e.bottom_among(v, remaining)
            if weight[bottom]:
                break
            if len(remaining) == 1:
                raise InvariantViolation(f"voter {v} would eliminate the last remaining candidate")
            remaining.discard(bottom)
        weight[bottom] -= 1
        counts[(v, bottom)] += 1

    unit = q.total / size if size else Fraction(1)
    witness = Matching.from_entries(e, {k: c * unit for k, c in counts.items()})
    winners = _check_winners(e, remaining, witness)
    logger.debug(f"serial veto over {size} turns: winners {sorted(remaining)}")
    return RuleOutcome(SERIAL_VETO, winners, witness)


def _elimination_closure(
        e: Election,
        remaining: set[Candidate],
        weight: Mapping[Candidate, Fraction],
        voters: Sequence[Voter],
        choose: Callable[[list[Candidate]], Candidate] | None = None,
) -> tuple[list[Candidate], dict[Candidate, frozenset[Voter]]]:
    """Remove zero-weight bottoms of `voters` one at a time until every bottom has positive weight.

    `choose` picks which eligible candidate goes next (default: first in candidate order); the
    fixpoint does not depend on it.
    """
    eliminated: list[Candidate] = []
    eliminators: dict[Candidate, frozenset[Voter]] = {}
    while voters:
        bottoms: dict[Candidate, set[Voter]] = defaultdict(set)
        for v in voters:
            bottoms[e.bottom_among(v, remaining)].add(v)
        eligible = [c for c in e.candidates if c in bottoms and weight[c] == 0]
        if not eligible:
            break
        if len(remaining) == 1:
            raise InvariantViolation("the last remaining candidate has no weight left")
        c = choose(eligible) if choose else eligible[0]
        remaining.discard(c)
        eliminated.append(c)
        eliminators[c] = frozenset(bottoms[c])
    return eliminated, eliminators


def _veto_process(
        e: Election,
        q: WeightVector,
        segments: Sequence[tuple[Fraction, Mapping[Voter, Fraction]]],
) -> tuple[set[Candidate], Matching, EliminationTrace]:
    """Continuous veto process with piecewise-constant eating rates.

    `segments` is a list of (duration, rate per voter) covering [0, 1]; the rates of each segment
    must add up to q.total so that the weights reach 0 exactly at time 1. Between events each
    voter with positive rate eats its lowest remaining candidate; events happen when an opposed
    candidate runs out of weight or a segment ends.
    """
    weight = dict(q.weights)
    total = q.total
    remaining = set(e.candidates)
    entries: dict[tuple[Voter, Candidate], Fraction] = defaultdict(Fraction)
    events: list[TraceEvent] = []
    t = Fraction(0)

    for duration, rates in segments:
        end = t + Fraction(duration)
        active = [v for v in e.voters if rates.get(v, 0) > 0]
        while t < end:
            if sum(weight.values()) != total * (1 - t):
                raise InvariantViolation(f"candidate weights {sum(weight.values())} are not conserved at t={t}")
            eliminated, eliminators = _elimination_closure(e, remaining, weight, active)
            bottoms = {v: e.bottom_among(v, remaining) for v in active}
            rate: dict[Candidate, Fraction] = defaultdict(Fraction)
            opposers: dict[Candidate, set[Voter]] = defaultdict(set)
            for v, b in bottoms.items():
                rate[b] += Fraction(rates[v])
                opposers[b].add(v)
            opposition = {c: frozenset(opposers[c]) for c in e.candidates if c in opposers}
            opposition.update(eliminators)
            events.append(TraceEvent(t, eliminated, dict(weight), opposition))
            if eliminated:
                logger.debug(f"t={t}: eliminated {eliminated}")

            if not rate:
                if active:
                    raise InvariantViolation(f"every remaining candidate is unopposed at t={t}")
                t = end
                continue
            delta = min(min(weight[c] / r for c, r in rate.items()), end - t)
            for v, b in bottoms.items():
                entries[(v, b)] += delta * Fraction(rates[v])
            for c, r in rate.items():
                weight[c] -= delta * r
            t += delta

    if t != 1:
        raise InvariantViolation(f"rate segments end at t={t}, not 1")
    events.append(TraceEvent(t, (), dict(weight), {}))
    witness = Matching.from_entries(e, entries)
    return remaining, witness, EliminationTrace(events, total)


def simultaneous_veto(e: Election, p: WeightVector, q: WeightVector) -> RuleOutcome:
    """SimultaneousVeto: every voter v eats at rate p(v) from time 0 to 1.

    The returned witness gives, for each (v, c), the weight v removed from c over the whole run.
    """
    _check_process_weights(e, p, q)
    rates = {v: p[v] for v in e.voters}
    remaining, witness, trace = _veto_process(e, q, [(Fraction(1), rates)])
    winners = _check_winners(e, remaining, witness)
    logger.debug(f"simultaneous veto: winners {sorted(remaining)} after {len(trace.events)} events")
    return RuleOutcome(SIMULTANEOUS_VETO, winners, witness, trace)


def simultaneous_plurality_veto(e: Election) -> RuleOutcome:
    """SimultaneousVeto with one unit per voter and plurality scores as candidate weights."""
    return simultaneous_veto(e, unit_voter_weights(e), plurality_weights(e))


def _serial_schedule(order: Sequence[Voter]) -> list[tuple[Fraction, dict[Voter, int]]]:
    size = len(order)
    return [(Fraction(1, size), {v: size}) for v in order]


def _serial_emulation(e: Election, q: WeightVector, order: Sequence[Voter]) -> RuleOutcome:
    """SerialVeto run as a veto process: the i-th voter of the order alone eats at rate N on [(i-1)/N, i/N)."""
    size = len(order)
    scaled = q.scaled(Fraction(size, q.total))
    remaining, witness, trace = _veto_process(e, scaled, _serial_schedule(order))
    return RuleOutcome(SERIAL_VETO, _check_winners(e, remaining, witness), witness, trace)


def _lowest_supported(e: Election, candidates: frozenset[Candidate], voters: Iterable[Voter]) -> dict[Voter, Candidate]:
    return {v: e.bottom_among(v, candidates) for v in voters}


def _walk_cycle(
        e: Election, entries: Mapping[tuple[Voter, Candidate], Fraction], bottoms: Mapping[Voter, Candidate],
) -> BottomTradingCycle:
    """Follow holder -> its bottom -> first holder of that bottom until a candidate repeats."""
    holders = [v for v in e.voters if v in bottoms]
    start = holders[0]
    first = next(c for c in e.ranking(start) if entries.get((start, c), 0) > 0)
    walk: list[tuple[Voter, Candidate]] = [(start, first)]
    seen = {first: 0}
    while True:
        v, _ = walk[-1]
        nxt = bottoms[v]
        if nxt in seen:
            cycle = walk[seen[nxt]:]
            return BottomTradingCycle(x for pair in cycle for x in pair)
        holder = next((u for u in holders if entries.get((u, nxt), 0) > 0), None)
        if holder is None:
            raise InvariantViolation(f"no voter holds weight on {nxt}")
        seen[nxt] = len(walk)
        walk.append((holder, nxt))


def _swap(entries: dict[tuple[Voter, Candidate], Fraction], phi: BottomTradingCycle) -> None:
    pairs = phi.pairs
    for i, (v, c) in enumerate(pairs):
        nxt = pairs[(i + 1) % len(pairs)][1]
        entries[(v, c)] -= 1
        entries[(v, nxt)] = entries.get((v, nxt), 0) + 1


def find_bottom_trading_cycle(e: Election, m: Matching, q: WeightVector) -> BottomTradingCycle | None:
    """A bottom trading cycle of an integral matching in which no voter holds weight on its own bottom.

    Bottoms are taken among the candidates with q > 0. Returns None when some voter already
    holds weight on its bottom or when the total is at most 1.
    """
    if not m.is_integral():
        raise InvalidMatchingError("bottom trading cycles need an integral matching")
    if m.total <= 1:
        return None
    holders = [v for v in e.voters if m.row_marginal[v] > 0]
    bottoms = _lowest_supported(e, q.support(), holders)
    if any(m[(v, bottoms[v])] > 0 for v in holders):
        return None
    return _walk_cycle(e, m.entries, bottoms)


def swap_along_cycle(m: Matching, phi: BottomTradingCycle) -> Matching:
    """Move one unit of each vi from ci to c(i+1); both marginals are unchanged."""
    entries = dict(m.entries)
    for v, c in phi.pairs:
        if entries.get((v, c), 0) < 1:
            raise InvalidMatchingError(f"voter {v} holds less than one unit on {c}")
    _swap(entries, phi)
    return Matching(entries, m.row_marginal, m.column_marginal)


def veto_order_for_matching(e: Election, p: WeightVector, q: WeightVector, m: Matching) -> VetoOrder:
    """A veto order under which SerialVeto elects every candidate admitting the integral matching `m`.

    Repeatedly emit the first voter (in voter order) holding weight on its lowest candidate with
    q > 0, and remove one unit of that entry from m, p and q. When no voter does, swap along a
    bottom trading cycle first.
    """
    check_weights(e, p, Domain.VOTERS)
    check_weights(e, q, Domain.CANDIDATES)
    p_left = _integral_weights(p, "voter weights")
    q_left = _integral_weights(q, "candidate weights")
    if not m.is_integral():
        raise InvalidMatchingError("the matching must be integral")
    if not is_valid_matching(e, m, p, q):
        raise MarginalMismatchError("the matching does not have marginals (p, q)")

    entries = dict(m.entries)
    order: list[Voter] = []
    for _ in range(sum(p_left.values())):
        supported = frozenset(c for c, w in q_left.items() if w > 0)
        holders = [v for v in e.voters if p_left[v] > 0]
        bottoms = _lowest_supported(e, supported, holders)
        chosen = next((v for v in holders if entries.get((v, bottoms[v]), 0) > 0), None)
        if chosen is None:
            phi = _walk_cycle(e, entries, bottoms)
            logger.debug(f"swapping along bottom trading cycle {phi.sequence}")
            _swap(entries, phi)
            chosen = next((v for v in holders if entries.get((v, bottoms[v]), 0) > 0), None)
            if chosen is None:
                raise InvariantViolation("a swap left every voter off its bottom")
        bottom = bottoms[chosen]
        order.append(chosen)
        p_left[chosen] -= 1
        q_left[bottom] -= 1
        entries[(chosen, bottom)] -= 1
    return VetoOrder(order)


def plurality_veto(e: Election, order: Sequence[Voter]) -> Candidate:
    """PluralityVeto, the single-winner rule: the candidate eliminated last wins.

    Candidates start with their plurality scores and those at 0 are dropped up front. Each voter
    of `order` (a permutation of the voters) decrements its lowest remaining candidate, which is
    eliminated as soon as its score reaches 0.
    """
    if sorted(order) != sorted(e.voters):
        raise VetoOrderError("plurality veto needs every voter exactly once")
    score = dict(plurality_weights(e).weights)
    remaining = {c for c, s in score.items() if s > 0}
    for v in order:
        bottom = e.bottom_among(v, remaining)
        score[bottom] -= 1
        if score[bottom] == 0:
            remaining.discard(bottom)
            if not remaining:
                return bottom
    raise InvariantViolation("plurality veto ended with candidates still standing")


def distinct_veto_orders(e: Election, p: WeightVector) -> Iterator[VetoOrder]:
    """Every distinct veto order for integral voter weights p, in lexicographic voter order."""
    check_weights(e, p, Domain.VOTERS)
    left = _integral_weights(p, "voter weights")
    size = sum(left.values())
    prefix: list[Voter] = []

    def extend():
        if len(prefix) == size:
            yield VetoOrder(prefix)
            return
        for v in e.voters:
            if left[v]:
                left[v] -= 1
                prefix.append(v)
                yield from extend()
                prefix.pop()
                left[v] += 1

    yield from extend()


def possible_winners(
        e: Election, p: WeightVector, q: WeightVector, *, limit: int | None = None,
) -> frozenset[Candidate]:
    """Union of SerialVeto winners over every distinct veto order for integral p."""
    check_weights(e, p, Domain.VOTERS)
    limit = Config.MAX_ORDER_LENGTH if limit is None else limit
    if p.total > limit:
        raise SizeLimitError(f"veto order enumeration is limited to N <= {limit}, got N={p.total}")
    winners: set[Candidate] = set()
    for order in distinct_veto_orders(e, p):
        winners.update(serial_veto(e, q, order, p=p).winners.winners)
    return frozenset(winners)
