"""Ballot data model: elections, tallies, weight vectors and the ballot file format."""

import enum
import logging
import math
import re
from fractions import Fraction
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self

import attrs
import numpy as np

from vetocore.errors import BallotParseError, ElectionError, WeightError

logger = logging.getLogger(__name__)

Candidate = str
Voter = int

NAME_RE = re.compile(r'^[A-Za-z0-9_-]+$')
COUNT_RE = re.compile(r'^[0-9]+$')
SEED_MASK = (1 << 64) - 1


def _rankings_converter(rankings: Iterable[Iterable[Candidate]]) -> tuple[tuple[Candidate, ...], ...]:
    return tuple(tuple(r) for r in rankings)


@attrs.frozen
class Election:
    """Voters, candidates and one strict ranking (best first) per voter.

    Voter ids default to 1..n in ballot order.
    """
    candidates: tuple[Candidate, ...] = attrs.field(converter=tuple)
    rankings: tuple[tuple[Candidate, ...], ...] = attrs.field(converter=_rankings_converter)
    voters: tuple[Voter, ...] = attrs.field(converter=tuple)
    _positions: tuple[dict[Candidate, int], ...] = attrs.field(init=False, repr=False, eq=False)
    _voter_index: dict[Voter, int] = attrs.field(init=False, repr=False, eq=False)

    @voters.default
    def _default_voters(self):
        return tuple(range(1, len(self.rankings) + 1))

    @_positions.default
    def _build_positions(self):
        return tuple({c: i for i, c in enumerate(r)} for r in self.rankings)

    @_voter_index.default
    def _build_voter_index(self):
        return {v: i for i, v in enumerate(self.voters)}

    def __attrs_post_init__(self):
        if not self.candidates:
            raise ElectionError("an election needs at least one candidate")
        if not self.rankings:
            raise ElectionError("an election needs at least one voter")
        if len(set(self.candidates)) != len(self.candidates):
            raise ElectionError("candidate names must be unique")
        if len(self.voters) != len(self.rankings):
            raise ElectionError("one voter id per ranking is required")
        if len(self._voter_index) != len(self.voters):
            raise ElectionError("voter ids must be unique")
        expected = set(self.candidates)
        for voter, ranking in zip(self.voters, self.rankings):
            if len(ranking) != len(expected) or set(ranking) != expected:
                raise ElectionError(f"ranking of voter {voter} is not a permutation of the candidates")

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def m(self) -> int:
        return len(self.candidates)

    def index(self, voter: Voter) -> int:
        try:
            return self._voter_index[voter]
        except KeyError:
            raise ElectionError(f"unknown voter {voter!r}") from None

    def check_candidate(self, candidate: Candidate) -> Candidate:
        if candidate not in self._positions[0]:
            raise ElectionError(f"unknown candidate {candidate!r}")
        return candidate

    def ranking(self, voter: Voter) -> tuple[Candidate, ...]:
        return self.rankings[self.index(voter)]

    def position(self, voter: Voter, candidate: Candidate) -> int:
        """0-based rank of `candidate` in the ballot of `voter` (0 is the top choice)."""
        positions = self._positions[self.index(voter)]
        try:
            return positions[candidate]
        except KeyError:
            raise ElectionError(f"unknown candidate {candidate!r}") from None

    def top(self, voter: Voter) -> Candidate:
        return self.ranking(voter)[0]

    def bottom(self, voter: Voter) -> Candidate:
        return self.ranking(voter)[-1]

    def prefers(self, voter: Voter, a: Candidate, b: Candidate) -> bool:
        """Strict preference a ≻_v b."""
        return self.position(voter, a) < self.position(voter, b)

    def weakly_prefers(self, voter: Voter, a: Candidate, b: Candidate) -> bool:
        return self.position(voter, a) <= self.position(voter, b)

    def bottom_among(self, voter: Voter, subset: Iterable[Candidate]) -> Candidate:
        """The member of `subset` that `voter` ranks lowest."""
        positions = self._positions[self.index(voter)]
        return max(subset, key=positions.__getitem__)

    def top_among(self, voter: Voter, subset: Iterable[Candidate]) -> Candidate:
        positions = self._positions[self.index(voter)]
        return min(subset, key=positions.__getitem__)

    def restrict(self, voters: Iterable[Voter]) -> 'Self':
        """Sub-election on a subset of the voters; voter ids are kept."""
        wanted = set(voters)
        keep = [v for v in self.voters if v in wanted]
        return Election(
            self.candidates,
            [self.ranking(v) for v in keep],
            keep,
        )

    def with_voter(self, ranking: Sequence[Candidate]) -> 'Self':
        """Add one voter (id = largest id + 1) at the end."""
        new_id = max(self.voters) + 1
        return Election(self.candidates, self.rankings + (tuple(ranking),), self.voters + (new_id,))

    def with_ranking(self, voter: Voter, ranking: Sequence[Candidate]) -> 'Self':
        rankings = list(self.rankings)
        rankings[self.index(voter)] = tuple(ranking)
        return attrs.evolve(self, rankings=rankings)

    def rename(self, mapping: Mapping[Candidate, Candidate]) -> 'Self':
        """Rename candidates; `mapping` must be a bijection of the candidate names."""
        renamed = [mapping[c] for c in self.candidates]
        if len(set(renamed)) != len(renamed):
            raise ElectionError("candidate renaming must be one-to-one")
        return Election(
            renamed,
            [[mapping[c] for c in r] for r in self.rankings],
            self.voters,
        )

    def permute_voters(self, order: Sequence[int]) -> 'Self':
        """Reorder ballots: the i-th ballot of the result is ballot `order[i]` (0-based) of this one.

        Ids are reassigned 1..n, so only the multiset of ballots survives.
        """
        if sorted(order) != list(range(self.n)):
            raise ElectionError("voter permutation must list every ballot index once")
        return Election(self.candidates, [self.rankings[i] for i in order])


@attrs.frozen
class ScoreProfile:
    plurality: dict[Candidate, int]
    veto: dict[Candidate, int]


class Domain(enum.Enum):
    VOTERS = 'voters'
    CANDIDATES = 'candidates'


def _weights_converter(weights: Mapping[Hashable, object]) -> dict[Hashable, Fraction]:
    return {k: Fraction(v) for k, v in dict(weights).items()}


@attrs.frozen
class WeightVector:
    """Non-negative rational weights over voters (p) or candidates (q).

    The total is whatever the weights add up to; normalisation to 1 is never assumed.
    """
    domain: Domain
    weights: dict[Hashable, Fraction] = attrs.field(converter=_weights_converter)

    @weights.validator
    def _check_weights(self, attribute, value):
        for key, weight in value.items():
            if weight < 0:
                raise WeightError(f"weight of {key!r} is negative ({weight})")

    def __getitem__(self, key: Hashable) -> Fraction:
        try:
            return self.weights[key]
        except KeyError:
            raise WeightError(f"no {self.domain.value[:-1]} weight for {key!r}") from None

    def __iter__(self):
        return iter(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def mass(self, keys: Iterable[Hashable]) -> Fraction:
        return sum((self[k] for k in keys), Fraction(0))

    def support(self) -> frozenset:
        return frozenset(k for k, w in self.weights.items() if w != 0)

    def is_integral(self) -> bool:
        return all(w.denominator == 1 for w in self.weights.values())

    def scaled(self, factor: Fraction | int) -> 'Self':
        return attrs.evolve(self, weights={k: w * factor for k, w in self.weights.items()})

    def normalized(self, total: Fraction | int = 1) -> 'Self':
        if self.total == 0:
            raise WeightError("cannot normalise a weight vector with total 0")
        return self.scaled(Fraction(total) / self.total)

    def to_dict(self) -> dict[str, str]:
        return {str(k): str(w) for k, w in self.weights.items()}


def check_weights(e: Election, w: WeightVector, domain: Domain) -> WeightVector:
    """Check that `w` lives on `domain` and weighs exactly the voters/candidates of `e`."""
    if w.domain is not domain:
        raise WeightError(f"expected weights over {domain.value}, got weights over {w.domain.value}")
    expected = set(e.voters) if domain is Domain.VOTERS else set(e.candidates)
    if set(w.weights) != expected:
        missing = sorted(map(str, expected - set(w.weights)))
        extra = sorted(map(str, set(w.weights) - expected))
        raise WeightError(f"weights over {domain.value} do not match the election (missing {missing}, unknown {extra})")
    return w


def integral_scale(*vectors: WeightVector) -> int:
    """Least common multiple of all weight denominators: scaling by it makes every vector integral."""
    return math.lcm(*(w.denominator for v in vectors for w in v.weights.values()), 1)


def uniform_weights(e: Election, domain: Domain, total: Fraction | int = 1) -> WeightVector:
    keys = e.voters if domain is Domain.VOTERS else e.candidates
    share = Fraction(total) / len(keys)
    return WeightVector(domain, {k: share for k in keys})


def unit_voter_weights(e: Election) -> WeightVector:
    """p(v) = 1 for every voter: the unnormalised uniform voter weights."""
    return WeightVector(Domain.VOTERS, {v: 1 for v in e.voters})


def plurality_weights(e: Election) -> WeightVector:
    return WeightVector(Domain.CANDIDATES, tally(e).plurality)


def veto_weights(e: Election) -> WeightVector:
    return WeightVector(Domain.CANDIDATES, tally(e).veto)


def k_approval_weights(e: Election, k: int) -> WeightVector:
    """q(c) = number of voters ranking c among their top k choices."""
    if not 1 <= k <= e.m:
        raise WeightError(f"k-approval needs 1 <= k <= {e.m}, got {k}")
    scores = dict.fromkeys(e.candidates, 0)
    for ranking in e.rankings:
        for c in ranking[:k]:
            scores[c] += 1
    return WeightVector(Domain.CANDIDATES, scores)


def tally(e: Election) -> ScoreProfile:
    """Plurality and veto scores of every candidate."""
    plurality = dict.fromkeys(e.candidates, 0)
    veto = dict.fromkeys(e.candidates, 0)
    for ranking in e.rankings:
        plurality[ranking[0]] += 1
        veto[ranking[-1]] += 1
    return ScoreProfile(plurality=plurality, veto=veto)


def reverse_profile(e: Election) -> Election:
    return Election(e.candidates, [tuple(reversed(r)) for r in e.rankings], e.voters)


def random_election(m: int, n: int, seed: int) -> Election:
    """Impartial Culture: every ranking is an independent uniform permutation.

    Voter i draws from its own PCG64 stream, keyed by SeedSequence(seed, spawn_key=(i,)), so
    growing n never changes the ballots of the first voters. Candidates are named c1..cm.
    """
    if m < 1 or n < 1:
        raise ElectionError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    candidates = tuple(f"c{i}" for i in range(1, m + 1))
    entropy = int(seed) & SEED_MASK
    rankings = []
    for index in range(n):
        stream = np.random.SeedSequence(entropy, spawn_key=(index,))
        rng = np.random.Generator(np.random.PCG64(stream))
        rankings.append(tuple(candidates[i] for i in rng.permutation(m)))
    return Election(candidates, rankings)


def parse_election(text: str) -> Election:
    """Parse ballot-file content; ballots are expanded by multiplicity in file order.

    Format::

        # comment
        candidates a b c
        2: a > b > c
        1: c > b > a
    """
    candidates: list[Candidate] | None = None
    rankings: list[tuple[Candidate, ...]] = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith('#'):
            continue

        if candidates is None:
            head, *names = line.split()
            if head != 'candidates':
                raise BallotParseError("expected the header 'candidates <name> <name> ...'", lineno)
            if not names:
                raise BallotParseError("the header lists no candidates", lineno)
            for name in names:
                if not NAME_RE.match(name):
                    raise BallotParseError(f"invalid candidate name {name!r}", lineno)
            seen = set()
            for name in names:
                if name in seen:
                    raise BallotParseError(f"duplicate candidate {name!r}", lineno)
                seen.add(name)
            candidates = names
            continue

        count_text, sep, body = line.partition(':')
        if not sep:
            raise BallotParseError("expected '<multiplicity>: <name> > <name> > ...'", lineno)
        if not COUNT_RE.match(count_text.strip()):
            raise BallotParseError(f"multiplicity {count_text.strip()!r} is not an integer", lineno)
        count = int(count_text.strip())
        if count < 1:
            raise BallotParseError(f"multiplicity must be at least 1, got {count}", lineno)

        names = [part.strip() for part in body.split('>')]
        seen = set()
        for name in names:
            if not NAME_RE.match(name):
                # "a = b" or "a, b" land here: ballots must be strict total orders
                raise BallotParseError(f"invalid ranking entry {name!r}", lineno)
            if name not in candidates:
                raise BallotParseError(f"unknown candidate {name!r}", lineno)
            if name in seen:
                raise BallotParseError(f"candidate {name!r} is repeated", lineno)
            seen.add(name)
        missing = [c for c in candidates if c not in seen]
        if missing:
            raise BallotParseError(f"ranking omits {', '.join(missing)}", lineno)
        rankings.extend([tuple(names)] * count)

    if candidates is None:
        raise BallotParseError("missing 'candidates' header", max(last_line, 1))
    if not rankings:
        raise BallotParseError("no ballots", max(last_line, 1))
    logger.debug(f"parsed election with n={len(rankings)}, m={len(candidates)}")
    return Election(candidates, rankings)


def render_election(e: Election) -> str:
    """Canonical ballot text: one line per voter, multiplicity 1."""
    lines = ["candidates " + " ".join(e.candidates)]
    lines.extend("1: " + " > ".join(r) for r in e.rankings)
    return "\n".join(lines) + "\n"


def load_election(path: str | Path) -> Election:
    return parse_election(Path(path).read_text(encoding='utf-8'))
