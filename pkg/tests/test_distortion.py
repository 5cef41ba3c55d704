from fractions import Fraction

import pytest
from hypothesis import given, settings

from strategies import elections
from vetocore.distortion import (
    INFINITY, VoterCandidateMetric, cost, distortion, line_metric_instance, reference_ratio,
)
from vetocore.election import Election
from vetocore.errors import SizeLimitError
from vetocore.rules import simultaneous_plurality_veto

MIDPOINT = {(1, 'a'): Fraction(1, 2), (1, 'b'): Fraction(1, 2), (2, 'a'): 1, (2, 'b'): 0}


def test_midpoint_metric(obvious_tie):
    d = VoterCandidateMetric(MIDPOINT)
    assert cost(obvious_tie, d, 'a') == Fraction(3, 2)
    assert cost(obvious_tie, d, 'b') == Fraction(1, 2)
    assert d.is_consistent(obvious_tie)
    assert d.satisfies_relaxed_triangle(obvious_tie)
    assert d.ratio(obvious_tie, 'a') == 3


def test_metric_checks(obvious_tie):
    with pytest.raises(ValueError):
        VoterCandidateMetric({(1, 'a'): -1})
    reversed_d = VoterCandidateMetric({(1, 'a'): 1, (1, 'b'): 0, (2, 'a'): 1, (2, 'b'): 0})
    assert not reversed_d.is_consistent(obvious_tie)
    broken = VoterCandidateMetric({(1, 'a'): 0, (1, 'b'): 5, (2, 'a'): 0, (2, 'b'): 0})
    assert not broken.satisfies_relaxed_triangle(obvious_tie)
    zero = VoterCandidateMetric(dict.fromkeys(MIDPOINT, 0))
    assert zero.ratio(obvious_tie, 'a') is None
    one_sided = VoterCandidateMetric({(1, 'a'): 0, (1, 'b'): 1, (2, 'a'): 0, (2, 'b'): 1})
    assert one_sided.ratio(obvious_tie, 'b') == INFINITY


def test_obvious_tie_distortion_is_three(obvious_tie):
    assert reference_ratio(obvious_tie, 'a', 'b') == 3
    assert distortion(obvious_tie, 'a') == 3
    assert distortion(obvious_tie, 'b') == 3


def test_reference_ratio_scales(obvious_tie):
    assert reference_ratio(obvious_tie, 'a', 'b', scale=2) == 6


def test_single_voter():
    e = Election(['a', 'b'], [['a', 'b']])
    assert distortion(e, 'a') == 1
    assert distortion(e, 'b') == INFINITY


def test_single_candidate():
    assert distortion(Election(['a'], [['a']]), 'a') == 1


def test_size_limit(obvious_tie):
    with pytest.raises(SizeLimitError):
        distortion(obvious_tie, 'a', limit=3)


@pytest.mark.parametrize('seed', range(12))
def test_line_metrics_never_beat_the_lp(seed):
    e, d = line_metric_instance(3, 3, seed)
    assert d.is_consistent(e)
    assert d.satisfies_relaxed_triangle(e)
    for c in e.candidates:
        bound = distortion(e, c)
        observed = d.ratio(e, c)
        if observed is not None:
            assert observed <= bound


def test_line_metric_is_deterministic():
    assert line_metric_instance(4, 3, 9) == line_metric_instance(4, 3, 9)


@given(elections(max_voters=3, max_candidates=3))
@settings(max_examples=25, deadline=None)
def test_plurality_veto_winners_have_distortion_at_most_three(e):
    for w in simultaneous_plurality_veto(e).winners.winners:
        assert distortion(e, w) <= 3
