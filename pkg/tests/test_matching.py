from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings

from helpers import plurality_pair, voter_weights
from strategies import election_with_weights
from vetocore.election import (
    Domain, Election, WeightVector, integral_scale, parse_election, plurality_weights,
)
from vetocore.errors import CertificateError, InvalidMatchingError, MarginalMismatchError
from vetocore.matching import (
    HallViolation, Matching, domination_graph, find_admitted_matching, is_valid_matching,
    neighborhood, tied_winners,
)


@pytest.mark.parametrize(('a', 't', 'expected'), [
    ('b2', {1, 2}, {'b2', 'b3', 'a3', 'b1'}),
    ('a1', {1}, {'a1', 'b1', 'a2', 'b2', 'b3', 'a3'}),
    ('a3', {1}, {'a3'}),
    ('b2', set(), set()),
])
def test_neighborhood(convexity, a, t, expected):
    assert neighborhood(convexity, a, t) == expected


def test_domination_graph(convexity):
    graph = domination_graph(convexity, 'b2')
    assert set(graph[('voter', 1)]) == {('candidate', c) for c in ('b2', 'b3', 'a3')}
    assert graph.number_of_nodes() == 9


def test_admitted_matching_for_zero_plurality_candidate(zero_plurality):
    p, q = plurality_pair(zero_plurality)
    matching = find_admitted_matching(zero_plurality, 'b', p, q)
    assert isinstance(matching, Matching)
    assert matching.entries == {(1, 'c'): 1, (2, 'a'): 1}


def test_hall_violation_on_convexity(convexity):
    p, q = plurality_pair(convexity)
    violation = find_admitted_matching(convexity, 'b2', p, q)
    assert isinstance(violation, HallViolation)
    assert violation.coalition == {1, 2}
    assert violation.neighbourhood == {'b1', 'b2', 'b3', 'a3'}
    assert (violation.p_mass, violation.q_mass) == (2, 1)


def test_hall_violation_needs_a_deficit():
    with pytest.raises(CertificateError):
        HallViolation('b2', {1}, {'b1', 'b2'}, 1, 1)


def test_single_candidate():
    e = Election(['a'], [['a']] * 3)
    p = voter_weights(e, ['1/2', '1/4', '1/4'])
    matching = find_admitted_matching(e, 'a', p, plurality_weights(e).normalized())
    assert matching.entries == {(1, 'a'): Fraction(1, 2), (2, 'a'): Fraction(1, 4), (3, 'a'): Fraction(1, 4)}


def test_identical_ballots_are_split_back():
    e = parse_election("candidates a b\n3: a > b\n1: b > a")
    p, q = plurality_pair(e)
    matching = find_admitted_matching(e, 'a', p, q)
    assert is_valid_matching(e, matching, p, q)
    assert all(matching.row_support(v) for v in e.voters)


def test_mismatched_totals(obvious_tie):
    p, q = plurality_pair(obvious_tie)
    with pytest.raises(MarginalMismatchError):
        find_admitted_matching(obvious_tie, 'a', p, q.normalized())


@given(election_with_weights(max_voters=5, max_candidates=4))
@settings(max_examples=60, deadline=None)
def test_hall_duality(data):
    e, p, q = data
    for a in e.candidates:
        result = find_admitted_matching(e, a, p, q)
        violators = [
            t for size in range(1, e.n + 1) for t in combinations(e.voters, size)
            if p.mass(t) > q.mass(neighborhood(e, a, t))
        ]
        if isinstance(result, Matching):
            assert not violators
            assert is_valid_matching(e, result, p, q)
            assert all(e.weakly_prefers(v, a, c) for v, c in result.entries)
        else:
            assert violators
            assert result.p_mass == p.mass(result.coalition)
            assert result.q_mass == q.mass(neighborhood(e, a, result.coalition))
            assert result.p_mass > result.q_mass


@given(election_with_weights(max_voters=5, max_candidates=4))
@settings(max_examples=40, deadline=None)
def test_integral_weights_give_integral_matchings(data):
    e, p, q = data
    scale = integral_scale(p, q)
    p, q = p.scaled(scale), q.scaled(scale)
    for a in e.candidates:
        result = find_admitted_matching(e, a, p, q)
        if isinstance(result, Matching):
            assert result.is_integral()


def test_pareto_matching_ties_everyone(pareto):
    matching = Matching.from_entries(pareto, {(1, 'c5'): 1, (2, 'c1'): 1})
    winners = tied_winners(pareto, matching)
    assert winners.winners == set(pareto.candidates)
    assert winners.prefix_indices == {1: 5, 2: 5}


@pytest.mark.parametrize(('entries', 'expected'), [
    ({(1, 'b'): 1, (2, 'a'): 1}, {'a', 'b'}),
    ({(1, 'a'): 1, (2, 'b'): 1}, set()),
])
def test_tied_winners(obvious_tie, entries, expected):
    assert tied_winners(obvious_tie, Matching.from_entries(obvious_tie, entries)).winners == expected


def test_tied_winners_are_prefix_intersection(convexity):
    p, q = plurality_pair(convexity)
    matching = find_admitted_matching(convexity, 'b1', p, q)
    winners = tied_winners(convexity, matching)
    rebuilt = set(convexity.candidates)
    for v, k in winners.prefix_indices.items():
        rebuilt &= set(convexity.ranking(v)[:k])
    assert rebuilt == winners.winners
    assert 'b1' in winners


def test_is_valid_matching(zero_plurality):
    p, q = plurality_pair(zero_plurality)
    matching = find_admitted_matching(zero_plurality, 'b', p, q)
    assert is_valid_matching(zero_plurality, matching, p, q)
    bumped = Matching.from_entries(zero_plurality, {(1, 'c'): 2, (2, 'a'): 1})
    assert not is_valid_matching(zero_plurality, bumped, p, q)
    zero = WeightVector(Domain.VOTERS, dict.fromkeys(zero_plurality.voters, 0))
    assert not is_valid_matching(zero_plurality, Matching.from_entries(zero_plurality, {}), zero, q)


def test_matching_rejects_bad_entries(obvious_tie):
    with pytest.raises(InvalidMatchingError):
        Matching.from_entries(obvious_tie, {(1, 'zz'): 1})
    with pytest.raises(InvalidMatchingError):
        Matching.from_entries(obvious_tie, {(1, 'a'): -1})
    p, q = plurality_pair(obvious_tie)
    with pytest.raises(MarginalMismatchError):
        Matching({(1, 'a'): 2}, p, q)


def test_matching_json(obvious_tie):
    matching = Matching.from_entries(obvious_tie, {(2, 'a'): Fraction(1, 2), (1, 'b'): Fraction(1, 2)})
    data = matching.to_dict(obvious_tie)
    assert data == {
        'p_total': '1',
        'entries': [
            {'voter': 1, 'candidate': 'b', 'weight': '1/2'},
            {'voter': 2, 'candidate': 'a', 'weight': '1/2'},
        ],
    }
    assert Matching.from_dict(obvious_tie, data) == matching
    with pytest.raises(MarginalMismatchError):
        Matching.from_dict(obvious_tie, data | {'p_total': '2'})
    with pytest.raises(InvalidMatchingError):
        Matching.from_dict(obvious_tie, {'entries': [{'voter': 'x'}]})
