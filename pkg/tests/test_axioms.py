import pytest
from hypothesis import given, settings

from strategies import elections
from vetocore import axioms
from vetocore.axioms import (
    AXIOMS, AxiomReport, Counterexample, Verdict, check_anonymity_neutrality, check_majority_family,
    check_monotonicity, check_resolvability, check_reversal_symmetry, condorcet_winners,
    demonstrate_violations, enumerate_elections, is_condorcet_counterexample, majority_sets,
    pareto_dominators, run_axiom_sweep, search_condorcet_counterexample, winners_of,
)
from vetocore.election import parse_election, tally
from vetocore.errors import SizeLimitError


def test_violation_demos_hold():
    demos = {demo.name: demo for demo in demonstrate_violations()}
    assert set(demos) == {'consistency', 'pareto', 'condorcet', 'plurality-veto-anonymity'}
    for demo in demos.values():
        assert demo.holds, demo.observed
    assert demos['consistency'].observed == "{a, b, c} {a, b, c, d} {a, b, c, d, e}"


def test_pareto_instance(pareto):
    assert winners_of(pareto) == set(pareto.candidates)
    assert pareto_dominators(pareto, 'c3') == {'c2'}
    assert pareto_dominators(pareto, 'c4') == {'c2', 'c3'}
    plurality = tally(pareto).plurality
    assert plurality['c2'] == plurality['c3'] == 0


def test_condorcet_instance(condorcet):
    assert condorcet_winners(condorcet) == {'a', 'b'}
    assert 'a' not in winners_of(condorcet)
    assert is_condorcet_counterexample(condorcet)


def test_condorcet_search_returns_first_counterexample(monkeypatch, obvious_tie, condorcet):
    drawn = []

    def draw(m, n, seed):
        drawn.append((m, n))
        return condorcet if len(drawn) == 4 else obvious_tie

    monkeypatch.setattr(axioms, 'random_election', draw)
    found = search_condorcet_counterexample(3, attempts=10)
    assert found is condorcet
    assert is_condorcet_counterexample(found)
    assert len(drawn) == 4
    assert all(4 <= m <= 5 and 2 <= n <= 7 for m, n in drawn)

    drawn.clear()
    assert search_condorcet_counterexample(3, attempts=3) is None
    assert len(drawn) == 3


def test_anonymity_neutrality_on_tie(obvious_tie):
    report = check_anonymity_neutrality(obvious_tie)
    assert report.passed
    swapped = obvious_tie.permute_voters([1, 0])
    assert winners_of(swapped) == {'a', 'b'}


def test_resolvability_examples(zero_plurality, obvious_tie):
    assert winners_of(zero_plurality.with_voter(['b', 'a', 'c'])) == {'b'}
    assert winners_of(obvious_tie.with_voter(['a', 'b'])) == {'a'}
    assert check_resolvability(zero_plurality).passed
    assert check_resolvability(obvious_tie).passed


def test_monotonicity_example(zero_plurality):
    promoted = zero_plurality.with_ranking(1, ['b', 'a', 'c'])
    assert 'b' in winners_of(promoted)
    assert check_monotonicity(zero_plurality).passed


def test_majority_sets():
    e = parse_election("candidates a b c\n2: a > b > c\n1: c > b > a")
    assert majority_sets(e) == [frozenset('a'), frozenset('ab')]
    assert check_majority_family(e).passed
    assert winners_of(e) == {'a'}


def test_reversal_symmetry_is_vacuous_on_ties(obvious_tie):
    assert check_reversal_symmetry(obvious_tie).passed


@given(elections(max_voters=4, max_candidates=4))
@settings(max_examples=30, deadline=None)
def test_checkers_pass_on_random_elections(e):
    for name, check in AXIOMS.items():
        report = check(e, 0)
        assert report.passed, (name, report.to_dict())


def test_enumerate_elections_counts():
    elections_ = list(enumerate_elections(2, 2))
    # m=1: n=1,2; m=2: n=1 plus two choices for the second ballot
    assert len(elections_) == 5
    assert all(e.rankings[0] == e.candidates for e in elections_)


def test_exhaustive_sweep_passes():
    reports = run_axiom_sweep(None, 3, 3, trials=0, seed=0, exhaustive=True)
    assert [r.axiom for r in reports] == list(AXIOMS)
    assert all(r.passed for r in reports)
    assert len({r.checked for r in reports}) == 1


def test_random_sweep_is_seeded():
    first = run_axiom_sweep(['majority', 'monotonicity'], 4, 4, trials=20, seed=5)
    second = run_axiom_sweep(['majority', 'monotonicity'], 4, 4, trials=20, seed=5)
    assert first == second
    assert all(r.checked == 20 for r in first)


def test_sweep_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_axiom_sweep(['no-such-axiom'], 3, 3, trials=1, seed=0)
    with pytest.raises(ValueError):
        run_axiom_sweep(None, 0, 3, trials=1, seed=0)
    with pytest.raises(SizeLimitError):
        run_axiom_sweep(None, 50, 2, trials=1, seed=0, exhaustive=True)


def test_counterexample_replay(consistency):
    counterexample = Counterexample.build(consistency, consistency.restrict([1, 2, 3]), "sub-election")
    assert counterexample.original_winners == ('a', 'b', 'c')
    assert counterexample.perturbed_winners == ('a', 'b', 'c', 'd')
    assert counterexample.replay()
    report = AxiomReport('consistency', Verdict.FAIL, counterexample)
    assert report.replay()
    assert report.to_dict()['counterexample']['note'] == "sub-election"
    tampered = Counterexample(counterexample.original, counterexample.perturbed, ['a'], ['a'])
    assert not tampered.replay()


def test_report_needs_counterexample_on_fail():
    with pytest.raises(ValueError):
        AxiomReport('majority', Verdict.FAIL)
