"""(p,q)-matchings: domination graphs, Hall's condition by max-flow, and tied winners W(M)."""

import logging
from collections import defaultdict
from fractions import Fraction
from typing import Any, Iterable, Mapping, TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self

import attrs
import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from vetocore.election import (
    Candidate, Domain, Election, Voter, WeightVector, check_weights, integral_scale,
)
from vetocore.errors import CertificateError, InvalidMatchingError, MarginalMismatchError, WeightError

logger = logging.getLogger(__name__)

SOURCE = ('source',)
SINK = ('sink',)

Entry = tuple[Voter, Candidate]


def _entries_converter(entries: Mapping[Entry, Any]) -> dict[Entry, Fraction]:
    converted = {}
    for key, weight in dict(entries).items():
        weight = Fraction(weight)
        if weight < 0:
            raise InvalidMatchingError(f"matching entry {key!r} is negative ({weight})")
        if weight:
            converted[key] = weight
    return converted


@attrs.frozen
class Matching:
    """A non-negative voter x candidate matrix with row sums p and column sums q.

    Only positive entries are stored; missing pairs are 0.
    """
    entries: dict[Entry, Fraction] = attrs.field(converter=_entries_converter)
    row_marginal: WeightVector
    column_marginal: WeightVector

    def __attrs_post_init__(self):
        rows: dict[Voter, Fraction] = defaultdict(Fraction)
        cols: dict[Candidate, Fraction] = defaultdict(Fraction)
        for (v, c), w in self.entries.items():
            if v not in self.row_marginal.weights:
                raise InvalidMatchingError(f"unknown voter {v!r} in matching")
            if c not in self.column_marginal.weights:
                raise InvalidMatchingError(f"unknown candidate {c!r} in matching")
            rows[v] += w
            cols[c] += w
        for v, target in self.row_marginal.weights.items():
            if rows[v] != target:
                raise MarginalMismatchError(f"row of voter {v} sums to {rows[v]}, expected {target}")
        for c, target in self.column_marginal.weights.items():
            if cols[c] != target:
                raise MarginalMismatchError(f"column of {c} sums to {cols[c]}, expected {target}")

    @classmethod
    def from_entries(cls, e: Election, entries: Mapping[Entry, Any]) -> 'Self':
        """Build a matching for `e`, deriving both marginals from the entries."""
        rows = dict.fromkeys(e.voters, Fraction(0))
        cols = dict.fromkeys(e.candidates, Fraction(0))
        for (v, c), w in entries.items():
            if v not in rows:
                raise InvalidMatchingError(f"unknown voter {v!r} in matching")
            if c not in cols:
                raise InvalidMatchingError(f"unknown candidate {c!r} in matching")
            rows[v] += Fraction(w)
            cols[c] += Fraction(w)
        return cls(
            entries,
            WeightVector(Domain.VOTERS, rows),
            WeightVector(Domain.CANDIDATES, cols),
        )

    def __getitem__(self, key: Entry) -> Fraction:
        return self.entries.get(key, Fraction(0))

    @property
    def total(self) -> Fraction:
        return self.row_marginal.total

    def row_support(self, voter: Voter) -> frozenset[Candidate]:
        return frozenset(c for (v, c) in self.entries if v == voter)

    def is_integral(self) -> bool:
        return all(w.denominator == 1 for w in self.entries.values())

    def scaled(self, factor: Fraction | int) -> 'Self':
        return Matching(
            {k: w * factor for k, w in self.entries.items()},
            self.row_marginal.scaled(factor),
            self.column_marginal.scaled(factor),
        )

    def ordered_entries(self, e: Election) -> list[tuple[Voter, Candidate, Fraction]]:
        """Positive entries in (voter index, rank of the candidate in that voter's ballot) order."""
        return [
            (v, c, self.entries[(v, c)])
            for v, ranking in zip(e.voters, e.rankings)
            for c in ranking
            if (v, c) in self.entries
        ]

    def to_dict(self, e: Election) -> dict:
        return {
            'p_total': str(self.total),
            'entries': [
                {'voter': v, 'candidate': c, 'weight': str(w)}
                for v, c, w in self.ordered_entries(e)
            ],
        }

    @classmethod
    def from_dict(cls, e: Election, data: Mapping[str, Any]) -> 'Self':
        try:
            raw_entries = data['entries']
        except (KeyError, TypeError):
            raise InvalidMatchingError("matching JSON needs an 'entries' list") from None
        entries: dict[Entry, Fraction] = defaultdict(Fraction)
        for item in raw_entries:
            try:
                voter = int(item['voter'])
                candidate = str(item['candidate'])
                weight = Fraction(str(item['weight']))
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise InvalidMatchingError(f"malformed matching entry {item!r}: {exc}") from None
            if weight < 0:
                raise InvalidMatchingError(f"matching entry {item!r} is negative")
            entries[(voter, candidate)] += weight
        matching = cls.from_entries(e, entries)
        if 'p_total' in data and Fraction(str(data['p_total'])) != matching.total:
            raise MarginalMismatchError(
                f"declared p_total {data['p_total']} differs from the entry total {matching.total}"
            )
        return matching


@attrs.frozen
class WinnerSet:
    """The tied winners W(M) together with prefix indices k_v realizing them."""
    winners: frozenset[Candidate] = attrs.field(converter=frozenset)
    prefix_indices: dict[Voter, int]

    def __contains__(self, candidate: Candidate) -> bool:
        return candidate in self.winners

    def __len__(self) -> int:
        return len(self.winners)

    def ordered(self, e: Election) -> list[Candidate]:
        return [c for c in e.candidates if c in self.winners]


@attrs.frozen
class HallViolation:
    """A coalition T with p(T) > q(N_a(T)): proof that `candidate` admits no (p,q)-matching."""
    candidate: Candidate
    coalition: frozenset[Voter] = attrs.field(converter=frozenset)
    neighbourhood: frozenset[Candidate] = attrs.field(converter=frozenset)
    p_mass: Fraction = attrs.field(converter=Fraction)
    q_mass: Fraction = attrs.field(converter=Fraction)

    @p_mass.validator
    def _check_violation(self, attribute, value):
        if value <= self.q_mass:
            raise CertificateError(f"p(T) = {value} does not exceed q(N(T)) = {self.q_mass}")


def neighborhood(e: Election, a: Candidate, t: Iterable[Voter]) -> frozenset[Candidate]:
    """N_a(T): every candidate that some voter in T ranks at or below `a`."""
    e.check_candidate(a)
    result: set[Candidate] = set()
    for v in t:
        ranking = e.ranking(v)
        result.update(ranking[e.position(v, a):])
    return frozenset(result)


def domination_graph(e: Election, a: Candidate) -> nx.Graph:
    """Bipartite graph G_a joining voter v to each candidate c with a weakly above c in v's ballot."""
    e.check_candidate(a)
    graph = nx.Graph()
    graph.add_nodes_from((('voter', v) for v in e.voters), bipartite=0)
    graph.add_nodes_from((('candidate', c) for c in e.candidates), bipartite=1)
    for v, ranking in zip(e.voters, e.rankings):
        for c in ranking[e.position(v, a):]:
            graph.add_edge(('voter', v), ('candidate', c))
    return graph


def _ranking_groups(e: Election) -> list[tuple[tuple[Candidate, ...], list[Voter]]]:
    groups: dict[tuple[Candidate, ...], list[Voter]] = {}
    for v, ranking in zip(e.voters, e.rankings):
        groups.setdefault(ranking, []).append(v)
    return list(groups.items())


def find_admitted_matching(
        e: Election, a: Candidate, p: WeightVector, q: WeightVector,
) -> Matching | HallViolation:
    """Max-flow test of Hall's condition for `a` on its domination graph.

    Returns a (p,q)-matching supported on G_a when `a` is (p,q)-dominant, and otherwise the
    source side of a minimum cut as a HallViolation. Weights are scaled to integers by the LCM
    of their denominators, so integral p and q give an integral matching. Voters with the same
    ballot share one flow node; its flow is split back over them in ballot order.
    """
    e.check_candidate(a)
    check_weights(e, p, Domain.VOTERS)
    check_weights(e, q, Domain.CANDIDATES)
    if p.total != q.total:
        raise MarginalMismatchError(f"p totals {p.total} but q totals {q.total}")
    if p.total <= 0:
        raise WeightError("weight totals must be positive")

    scale = integral_scale(p, q)
    groups = _ranking_groups(e)
    graph = nx.DiGraph()
    graph.add_node(SOURCE)
    graph.add_node(SINK)
    for gi, (ranking, members) in enumerate(groups):
        capacity = int(sum(p[v] for v in members) * scale)
        if capacity == 0:
            continue
        graph.add_edge(SOURCE, ('group', gi), capacity=capacity)
        # no capacity attribute: unbounded
        for c in ranking[ranking.index(a):]:
            graph.add_edge(('group', gi), ('candidate', c))
    for c in e.candidates:
        capacity = int(q[c] * scale)
        if capacity:
            graph.add_edge(('candidate', c), SINK, capacity=capacity)

    demand = int(p.total * scale)
    flow_value, flow = nx.maximum_flow(graph, SOURCE, SINK, flow_func=edmonds_karp)
    if flow_value < demand:
        _, (source_side, _) = nx.minimum_cut(graph, SOURCE, SINK, flow_func=edmonds_karp)
        coalition = frozenset(
            v
            for gi, (_, members) in enumerate(groups)
            if ('group', gi) in source_side
            for v in members
            if p[v] > 0
        )
        blocked = neighborhood(e, a, coalition)
        logger.debug(f"{a} is not dominant: flow {flow_value}/{demand}, coalition {sorted(coalition)}")
        return HallViolation(a, coalition, blocked, p.mass(coalition), q.mass(blocked))

    entries: dict[Entry, Fraction] = defaultdict(Fraction)
    for gi, (ranking, members) in enumerate(groups):
        node = ('group', gi)
        if node not in flow:
            continue
        pending = [[c, flow[node][('candidate', c)]] for c in ranking[ranking.index(a):]]
        pending = [item for item in pending if item[1] > 0]
        cursor = 0
        for v in members:
            need = int(p[v] * scale)
            while need > 0:
                c, available = pending[cursor]
                take = min(need, available)
                entries[(v, c)] += Fraction(take, scale)
                need -= take
                pending[cursor][1] -= take
                if pending[cursor][1] == 0:
                    cursor += 1
    return Matching.from_entries(e, entries)


def tied_winners(e: Election, m: Matching) -> WinnerSet:
    """W(M): every candidate that weakly beats, for each voter, the top of that voter's support in M.

    k_v is 1 + the position of the top supported candidate of v, or m for an empty row. The
    result may be empty for an arbitrary matching.
    """
    if set(m.row_marginal.weights) != set(e.voters) or set(m.column_marginal.weights) != set(e.candidates):
        raise InvalidMatchingError("matching does not belong to this election")
    prefix_indices: dict[Voter, int] = {}
    winners = set(e.candidates)
    for v, ranking in zip(e.voters, e.rankings):
        support = m.row_support(v)
        k = min(e.position(v, c) for c in support) + 1 if support else e.m
        prefix_indices[v] = k
        winners.intersection_update(ranking[:k])
    return WinnerSet(winners, prefix_indices)


def is_valid_matching(e: Election, m: Matching, p: WeightVector, q: WeightVector) -> bool:
    """True iff `m` is non-negative with row sums `p` and column sums `q` over the names of `e`."""
    voters, candidates = set(e.voters), set(e.candidates)
    if set(p.weights) != voters or set(q.weights) != candidates:
        return False
    rows: dict[Voter, Fraction] = defaultdict(Fraction)
    cols: dict[Candidate, Fraction] = defaultdict(Fraction)
    for (v, c), w in m.entries.items():
        if v not in voters or c not in candidates or w < 0:
            return False
        rows[v] += w
        cols[c] += w
    return all(rows[v] == p[v] for v in voters) and all(cols[c] == q[c] for c in candidates)
