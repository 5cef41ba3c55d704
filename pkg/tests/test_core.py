from fractions import Fraction

import pytest
from hypothesis import given, settings

from helpers import plurality_pair
from strategies import election_with_weights, elections
from vetocore.core import (
    BlockingPair, core_certificates, find_blocking, is_prefix_intersecting, proportional_veto_core,
    veto_core,
)
from vetocore.election import Domain, Election, parse_election, tally, uniform_weights
from vetocore.errors import CertificateError, MarginalMismatchError, SizeLimitError
from vetocore.matching import Matching


def test_convexity_core(convexity):
    core = veto_core(convexity, *plurality_pair(convexity))
    assert {'b1', 'b3'} <= core
    assert 'b2' not in core


def test_zero_plurality_core(zero_plurality):
    assert veto_core(zero_plurality, *plurality_pair(zero_plurality)) == {'a', 'b', 'c'}


def test_single_candidate_core():
    e = Election(['a'], [['a'], ['a']])
    assert veto_core(e, *plurality_pair(e)) == {'a'}


def test_blocking_pair_for_b2(convexity):
    p = uniform_weights(convexity, Domain.VOTERS)
    q = plurality_pair(convexity)[1].normalized()
    pair = find_blocking(convexity, p, q, 'b2')
    assert pair.coalition == {1, 2}
    assert pair.witness == {'a1', 'a2'}
    assert pair.margin == Fraction(2, 3) - Fraction(1, 3)


def test_no_blocking_pair_for_zero_plurality_candidate(zero_plurality):
    assert find_blocking(zero_plurality, *plurality_pair(zero_plurality), 'b') is None


def test_unanimous_top_is_never_blocked():
    e = parse_election("candidates a b c\n1: a > b > c\n1: a > c > b\n1: a > b > c")
    assert find_blocking(e, *plurality_pair(e), 'a') is None


def test_find_blocking_limits(convexity):
    with pytest.raises(SizeLimitError):
        find_blocking(convexity, *plurality_pair(convexity), 'b2', limit=2)
    p, q = plurality_pair(convexity)
    with pytest.raises(MarginalMismatchError):
        find_blocking(convexity, p, q.normalized(), 'b2')


def test_blocking_pair_checks_preferences(convexity):
    p, q = plurality_pair(convexity)
    with pytest.raises(CertificateError):
        BlockingPair.create(convexity, p, q, 'b2', {1, 2}, {'a1', 'a3'})
    with pytest.raises(CertificateError):
        BlockingPair.create(convexity, p, q, 'b2', {1}, {'a1'})


def test_certificates(convexity):
    certificates = core_certificates(convexity, *plurality_pair(convexity))
    assert isinstance(certificates['b1'], Matching)
    blocking = certificates['b2']
    assert isinstance(blocking, BlockingPair)
    assert blocking.to_dict(convexity) == {'coalition': [1, 2], 'witness': ['a1', 'a2'], 'margin': '1'}


@pytest.mark.parametrize(('subset', 'expected'), [
    ({'b1', 'b3'}, False),
    ({'a1', 'a2', 'a3', 'b1', 'b2', 'b3'}, True),
    (set(), True),
])
def test_prefix_intersecting(convexity, subset, expected):
    ok, indices = is_prefix_intersecting(convexity, subset)
    assert ok is expected
    if subset == set(convexity.candidates):
        assert indices == {1: 6, 2: 6, 3: 6}
    if not expected:
        assert indices is None


@given(election_with_weights(max_voters=5, max_candidates=5))
@settings(max_examples=60, deadline=None)
def test_blocking_oracle_matches_core(data):
    e, p, q = data
    core = veto_core(e, p, q)
    assert core
    assert core == {a for a in e.candidates if find_blocking(e, p, q, a) is None}


@given(elections(max_voters=5, max_candidates=5))
@settings(max_examples=60, deadline=None)
def test_uniform_core_is_proportional_core(e):
    p = uniform_weights(e, Domain.VOTERS)
    q = uniform_weights(e, Domain.CANDIDATES)
    assert veto_core(e, p, q) == proportional_veto_core(e)


@given(elections(max_voters=6, max_candidates=5))
@settings(deadline=None)
def test_heavily_vetoed_candidates_leave_proportional_core(e):
    core = proportional_veto_core(e)
    vetoes = tally(e).veto
    assert all(vetoes[c] * e.m <= e.n for c in core)
