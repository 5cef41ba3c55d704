"""Axiom checkers for SimultaneousPluralityVeto, seeded sweeps, and replays of its known violations."""

import enum
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations_with_replacement, permutations
from typing import Callable, Iterable, Iterator, TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self

import attrs
import numpy as np

from vetocore.config import Config
from vetocore.election import (
    Candidate, Election, parse_election, random_election, render_election, reverse_profile, tally,
)
from vetocore.errors import SizeLimitError
from vetocore.rules import plurality_veto, simultaneous_plurality_veto

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1

OBVIOUS_TIE = """\
candidates a b
1: a > b
1: b > a
"""

RESOLVABILITY = """\
candidates a b c
1: a > b > c
1: c > b > a
"""

CONSISTENCY = """\
candidates a b c d e
1: a > c > d > b > e
1: b > c > a > d > e
1: d > c > b > a > e
1: c > a > b > d > e
1: e > d > b > a > c
"""

PARETO = """\
candidates c1 c2 c3 c4 c5
1: c1 > c2 > c3 > c4 > c5
1: c5 > c2 > c3 > c4 > c1
"""

# a is a weak Condorcet winner, but voter 6 alone blocks it: plu(a) = plu(d) = 0
CONDORCET = """\
candidates a b c d e
1: e > a > b > c > d
1: c > a > b > e > d
1: c > e > a > b > d
1: b > a > c > e > d
1: b > a > e > c > d
1: b > c > e > a > d
"""


def winners_of(e: Election) -> frozenset[Candidate]:
    return simultaneous_plurality_veto(e).winners.winners


class Verdict(enum.Enum):
    PASS = 'PASS'
    FAIL = 'FAIL'


@attrs.frozen
class Counterexample:
    """Two elections in ballot format with the winner sets observed on each."""
    original: str
    perturbed: str
    original_winners: tuple[Candidate, ...] = attrs.field(converter=tuple)
    perturbed_winners: tuple[Candidate, ...] = attrs.field(converter=tuple)
    note: str = ''

    @classmethod
    def build(cls, original: Election, perturbed: Election, note: str = '') -> 'Self':
        return cls(
            render_election(original),
            render_election(perturbed),
            [c for c in original.candidates if c in winners_of(original)],
            [c for c in perturbed.candidates if c in winners_of(perturbed)],
            note,
        )

    def replay(self) -> bool:
        """Re-run the rule on both stored elections; True if it gives the recorded winners again."""
        original = parse_election(self.original)
        perturbed = parse_election(self.perturbed)
        return (
            winners_of(original) == frozenset(self.original_winners)
            and winners_of(perturbed) == frozenset(self.perturbed_winners)
        )

    def to_dict(self) -> dict:
        return attrs.asdict(self, recurse=False) | {
            'original_winners': list(self.original_winners),
            'perturbed_winners': list(self.perturbed_winners),
        }


@attrs.frozen
class AxiomReport:
    axiom: str
    verdict: Verdict
    counterexample: Counterexample | None = attrs.field(default=None)
    checked: int = 1

    @counterexample.validator
    def _fail_has_counterexample(self, attribute, value):
        if (self.verdict is Verdict.FAIL) != (value is not None):
            raise ValueError("a FAIL report carries a counterexample and a PASS report does not")

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def replay(self) -> bool:
        return self.counterexample.replay() if self.counterexample else True

    def to_dict(self) -> dict:
        return {
            'axiom': self.axiom,
            'verdict': self.verdict.value,
            'checked': self.checked,
            'counterexample': self.counterexample.to_dict() if self.counterexample else None,
        }


def _passed(axiom: str) -> AxiomReport:
    return AxiomReport(axiom, Verdict.PASS)


def _failed(axiom: str, original: Election, perturbed: Election, note: str) -> AxiomReport:
    logger.debug(f"{axiom} fails: {note}")
    return AxiomReport(axiom, Verdict.FAIL, Counterexample.build(original, perturbed, note))


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=key)))


def check_anonymity_neutrality(e: Election, seed: int = 0, samples: int = 8) -> AxiomReport:
    """Permuting voters and renaming candidates must rename the winners and nothing else.

    The identity permutation is always checked first, then `samples` random pairs.
    """
    axiom = 'anonymity-neutrality'
    base = winners_of(e)
    rng = _rng(seed)
    trials = [(list(range(e.n)), list(e.candidates))]
    for _ in range(samples):
        trials.append((
            [int(i) for i in rng.permutation(e.n)],
            [e.candidates[int(i)] for i in rng.permutation(e.m)],
        ))
    for order, names in trials:
        renaming = dict(zip(e.candidates, names))
        perturbed = e.permute_voters(order).rename(renaming)
        expected = frozenset(renaming[w] for w in base)
        if winners_of(perturbed) != expected:
            return _failed(axiom, e, perturbed, f"expected winners {sorted(expected)}")
    return _passed(axiom)


def _completions(e: Election, w: Candidate, seed: int, samples: int) -> list[tuple[Candidate, ...]]:
    rest = [c for c in e.candidates if c != w]
    if e.m <= Config.MAX_FULL_COMPLETION:
        return [tuple(p) for p in permutations(rest)]
    rng = _rng(seed)
    found = [tuple(rest), tuple(reversed(rest))]
    for _ in range(samples):
        found.append(tuple(rest[int(i)] for i in rng.permutation(len(rest))))
    return list(dict.fromkeys(found))


def check_resolvability(e: Election, seed: int = 0, samples: int = 6) -> AxiomReport:
    """A new voter who top-ranks a current winner w makes w the unique winner."""
    axiom = 'resolvability'
    for w in sorted(winners_of(e), key=e.candidates.index):
        for rest in _completions(e, w, seed, samples):
            perturbed = e.with_voter((w, *rest))
            if winners_of(perturbed) != {w}:
                return _failed(axiom, e, perturbed, f"added voter top-ranks {w}")
    return _passed(axiom)


def check_monotonicity(e: Election, seed: int = 0) -> AxiomReport:
    """A winner moved one place up in one ballot still wins."""
    axiom = 'monotonicity'
    for w in sorted(winners_of(e), key=e.candidates.index):
        for v in e.voters:
            position = e.position(v, w)
            if position == 0:
                continue
            ranking = list(e.ranking(v))
            ranking[position - 1], ranking[position] = ranking[position], ranking[position - 1]
            perturbed = e.with_ranking(v, ranking)
            if w not in winners_of(perturbed):
                return _failed(axiom, e, perturbed, f"voter {v} moved {w} up one place")
    return _passed(axiom)


def majority_sets(e: Election) -> list[frozenset[Candidate]]:
    """Every proper candidate set that a strict majority ranks, in some order, above everyone else.

    Such a set is the top-k prefix of each majority ballot, so counting prefixes finds them all.
    """
    found = []
    for k in range(1, e.m):
        counts = Counter(frozenset(r[:k]) for r in e.rankings)
        found.extend(s for s, count in counts.items() if 2 * count > e.n)
    return found


def check_majority_family(e: Election, seed: int = 0) -> AxiomReport:
    """Winners lie inside every set a strict majority ranks on top (Majority, Majority Loser, mutual majority)."""
    axiom = 'majority'
    winners = winners_of(e)
    for s in majority_sets(e):
        if not winners <= s:
            return _failed(axiom, e, e, f"majority front-ranks {sorted(s)}")
    return _passed(axiom)


def check_reversal_symmetry(e: Election, seed: int = 0) -> AxiomReport:
    """A unique winner stops winning once every ballot is reversed; it also has plu(w) > veto(w)."""
    axiom = 'reversal-symmetry'
    winners = winners_of(e)
    if len(winners) != 1:
        return _passed(axiom)
    (w,) = winners
    scores = tally(e)
    reversed_e = reverse_profile(e)
    if scores.plurality[w] <= scores.veto[w]:
        return _failed(axiom, e, reversed_e, f"unique winner {w} has plu {scores.plurality[w]} <= veto {scores.veto[w]}")
    if w in winners_of(reversed_e):
        return _failed(axiom, e, reversed_e, f"{w} still wins after reversal")
    return _passed(axiom)


AXIOMS: dict[str, Callable[[Election, int], AxiomReport]] = {
    'anonymity-neutrality': check_anonymity_neutrality,
    'resolvability': check_resolvability,
    'monotonicity': check_monotonicity,
    'majority': check_majority_family,
    'reversal-symmetry': check_reversal_symmetry,
}


def condorcet_winners(e: Election) -> frozenset[Candidate]:
    """Weak Condorcet winners: preferred to each rival by at least half of the voters."""
    winners = set()
    for c in e.candidates:
        if all(
            2 * sum(e.prefers(v, c, d) for v in e.voters) >= e.n
            for d in e.candidates if d != c
        ):
            winners.add(c)
    return frozenset(winners)


def is_condorcet_counterexample(e: Election) -> bool:
    return bool(condorcet_winners(e) - winners_of(e))


def search_condorcet_counterexample(seed: int, attempts: int = 2000, n_max: int = 7, m_max: int = 5) -> Election | None:
    """First seeded random election (m >= 4) with a weak Condorcet winner outside the winners."""
    for attempt in range(attempts):
        rng = _rng(seed, attempt)
        m = int(rng.integers(4, m_max + 1))
        n = int(rng.integers(2, n_max + 1))
        e = random_election(m, n, int(rng.integers(0, 2**63)))
        if is_condorcet_counterexample(e):
            logger.debug(f"Condorcet counterexample found after {attempt + 1} attempts")
            return e
    return None


@attrs.frozen
class ViolationDemo:
    """A documented failure of the rule, replayed: `holds` is True when it happens exactly as expected."""
    name: str
    expected: str
    observed: str
    holds: bool

    def to_dict(self) -> dict:
        return attrs.asdict(self)


def _names(e: Election, s: Iterable[Candidate]) -> str:
    s = set(s)
    return '{' + ', '.join(c for c in e.candidates if c in s) + '}'


def pareto_dominators(e: Election, c: Candidate) -> frozenset[Candidate]:
    return frozenset(b for b in e.candidates if b != c and all(e.prefers(v, b, c) for v in e.voters))


def demonstrate_violations() -> list[ViolationDemo]:
    demos = []

    e = parse_election(CONSISTENCY)
    part1, part2 = e.restrict([1, 2, 3]), e.restrict([4, 5])
    observed = [winners_of(x) for x in (e, part1, part2)]
    expected = [frozenset('abc'), frozenset('abcd'), frozenset('abcde')]
    demos.append(ViolationDemo(
        'consistency',
        ' '.join(_names(e, s) for s in expected),
        ' '.join(_names(e, s) for s in observed),
        observed == expected and observed[0] != observed[1] & observed[2],
    ))

    e = parse_election(PARETO)
    winners = winners_of(e)
    dominated = {c: pareto_dominators(e, c) for c in winners if pareto_dominators(e, c)}
    plurality = tally(e).plurality
    demos.append(ViolationDemo(
        'pareto',
        f"winners {_names(e, e.candidates)}, c2 dominates c3 and c4, every dominator has plurality 0",
        f"winners {_names(e, winners)}, dominated winners "
        + ', '.join(f"{c} by {_names(e, b)}" for c, b in dominated.items()),
        winners == frozenset(e.candidates)
        and {'c3', 'c4'} <= set(dominated)
        and 'c2' in dominated['c3'] & dominated['c4']
        and all(plurality[b] == 0 for bs in dominated.values() for b in bs),
    ))

    e = parse_election(CONDORCET)
    condorcet = condorcet_winners(e)
    winners = winners_of(e)
    demos.append(ViolationDemo(
        'condorcet',
        "a is a weak Condorcet winner and loses",
        f"weak Condorcet winners {_names(e, condorcet)}, winners {_names(e, winners)}",
        'a' in condorcet and 'a' not in winners,
    ))

    e = parse_election(OBVIOUS_TIE)
    first, second = plurality_veto(e, [1, 2]), plurality_veto(e, [2, 1])
    demos.append(ViolationDemo(
        'plurality-veto-anonymity',
        "order 1,2 elects a; order 2,1 elects b",
        f"order 1,2 elects {first}; order 2,1 elects {second}",
        (first, second) == ('a', 'b'),
    ))
    return demos


def enumerate_elections(n_max: int, m_max: int) -> Iterator[Election]:
    """Every election with n <= n_max and m <= m_max, up to voter order and candidate names.

    Ballot multisets are listed once, and only those containing the ballot c1 > ... > cm:
    renaming can always turn one of the ballots into that one.
    """
    for m in range(1, m_max + 1):
        candidates = tuple(f"c{i}" for i in range(1, m + 1))
        rankings = list(permutations(candidates))
        for n in range(1, n_max + 1):
            for rest in combinations_with_replacement(rankings, n - 1):
                yield Election(candidates, (candidates, *rest))


def _trial_election(seed: int, trial: int, n_max: int, m_max: int) -> Election:
    rng = _rng(seed, trial)
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    return random_election(m, n, int(rng.integers(0, 2**63)))


def _check_election(e: Election, axioms: tuple[str, ...], seed: int) -> list[AxiomReport]:
    return [AXIOMS[name](e, seed) for name in axioms]


def _check_trial(args: tuple) -> list[AxiomReport]:
    seed, trial, n_max, m_max, axioms = args
    return _check_election(_trial_election(seed, trial, n_max, m_max), axioms, seed + trial)


def _check_enumerated(args: tuple) -> list[AxiomReport]:
    e, axioms, seed = args
    return _check_election(e, axioms, seed)


def run_axiom_sweep(
        axioms: Iterable[str] | None,
        n_max: int,
        m_max: int,
        trials: int,
        seed: int,
        *,
        workers: int | None = None,
        exhaustive: bool = False,
) -> list[AxiomReport]:
    """Check each axiom on many elections and fold the results into one report per axiom.

    Elections are seeded random ones (n in [1, n_max], m in [1, m_max]) or, with `exhaustive`,
    every election from `enumerate_elections`. The first failure in trial order is reported, so
    the result does not depend on the number of workers.
    """
    names = tuple(axioms) if axioms else tuple(AXIOMS)
    unknown = [name for name in names if name not in AXIOMS]
    if unknown:
        raise ValueError(f"unknown axiom(s) {', '.join(unknown)}; choose from {', '.join(AXIOMS)}")
    if n_max < 1 or m_max < 1:
        raise ValueError("n and m must be at least 1")
    workers = Config.WORKERS if workers is None else workers

    if exhaustive:
        if n_max > Config.MAX_COALITION_VOTERS:
            raise SizeLimitError(f"exhaustive sweeps are limited to n <= {Config.MAX_COALITION_VOTERS}")
        jobs = [(e, names, seed) for e in enumerate_elections(n_max, m_max)]
        check = _check_enumerated
    else:
        jobs = [(seed, trial, n_max, m_max, names) for trial in range(trials)]
        check = _check_trial

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [check(job) for job in jobs]

    reports = []
    for index, name in enumerate(names):
        failures = [r[index] for r in results if not r[index].passed]
        if failures:
            reports.append(attrs.evolve(failures[0], checked=len(results)))
        else:
            reports.append(AxiomReport(name, Verdict.PASS, checked=len(results)))
    logger.debug(f"axiom sweep over {len(results)} elections: {[r.verdict.value for r in reports]}")
    return reports
