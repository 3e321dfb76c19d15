"""
Tests for the accept/reject search
"""
import json
import math

import pytest

from errors import InvalidDensity, NonPositive
from oracle import exhaustive_search
from proposals import ProposalKind
from scheme import Scheme, cardinality, enumerate_schemes
from search import SearchConfig, acceptance_probability, relative_efficiency, run_search, write_trace
from weibull import CriterionEvaluator, CriterionSpec, WeibullParams, evaluate_criterion

# Relative efficiency each proposal reaches in at least 18 of 20 seeds at
# 10000 iterations. MVHG rarely moves a whole sub-total into one cell and
# settles next to the one-step optima on the larger designs
QUALITY_BOUNDS = [
    (10, 5, WeibullParams(0.5, 1.0), ProposalKind.UNIFORM, 0.999),
    (10, 5, WeibullParams(0.5, 1.0), ProposalKind.MULTINOMIAL, 0.999),
    (10, 5, WeibullParams(0.5, 1.0), ProposalKind.MVHG, 0.998),
    (15, 5, WeibullParams(1.0, 1.0), ProposalKind.UNIFORM, 0.999),
    (15, 5, WeibullParams(1.0, 1.0), ProposalKind.MULTINOMIAL, 0.95),
    (15, 5, WeibullParams(1.0, 1.0), ProposalKind.MVHG, 0.975),
    (20, 5, WeibullParams(2.0, 1.0), ProposalKind.UNIFORM, 0.999),
    (20, 5, WeibullParams(2.0, 1.0), ProposalKind.MULTINOMIAL, 0.92),
    (20, 5, WeibullParams(2.0, 1.0), ProposalKind.MVHG, 0.94),
]


def test_acceptance_probability_downhill_is_one():
    assert acceptance_probability(1.0, 0.5, -2.0, -2.0) == 1.0


def test_acceptance_probability_uphill():
    assert acceptance_probability(0.5, 1.5, -2.0, -2.0) == pytest.approx(math.exp(-1.0))
    # Proposal densities enter as pi(old) / pi(new)
    assert acceptance_probability(1.0, 1.0, -3.0, -1.0) == pytest.approx(math.exp(-2.0))


def test_acceptance_probability_invalid_density():
    with pytest.raises(InvalidDensity):
        acceptance_probability(1.0, 0.5, -math.inf, -1.0)
    with pytest.raises(InvalidDensity):
        acceptance_probability(1.0, 0.5, -1.0, math.nan)


def test_acceptance_probability_zero_density_candidate():
    # A candidate with zero proposal density has an infinite ratio
    assert acceptance_probability(1.0, 2.0, -1.0, -math.inf) == 1.0


def test_relative_efficiency():
    assert relative_efficiency(0.3349, 0.3349) == 1.0
    assert relative_efficiency(1.0, 2.0) == 0.5
    with pytest.raises(NonPositive):
        relative_efficiency(0.0, 1.0)
    with pytest.raises(NonPositive):
        relative_efficiency(1.0, -1.0)


def test_search_config_validation():
    params = WeibullParams(1.0, 1.0)
    with pytest.raises(ValueError):
        SearchConfig(10, 5, params, iterations=0)
    with pytest.raises(ValueError):
        SearchConfig(10, 5, params, m1=6)
    with pytest.raises(ValueError):
        SearchConfig(4, 5, params)
    assert SearchConfig(10, 5, params, proposal="uniform").proposal is ProposalKind.UNIFORM


def test_search_is_reproducible():
    config = SearchConfig(12, 4, WeibullParams(1.0, 1.0), iterations=300, seed=42, trace=True)
    first = run_search(config)
    second = run_search(config)
    assert first.best_scheme == second.best_scheme
    assert first.best_psi == second.best_psi
    assert first.n_ac == second.n_ac
    assert [e.to_dict() for e in first.trace] == [e.to_dict() for e in second.trace]


def test_search_counts_and_trace():
    config = SearchConfig(
        12, 4, WeibullParams(1.0, 1.0), proposal=ProposalKind.MVHG, iterations=200, seed=1, trace=True
    )
    report = run_search(config)
    assert report.n_it == 200
    assert 0 <= report.n_ac <= 200
    assert len(report.trace) == 200
    assert sum(e.accepted for e in report.trace) == report.n_ac
    # Best-so-far is non-increasing and ends at the reported best
    best = [e.best_psi for e in report.trace]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert best[-1] == report.best_psi


def test_best_psi_matches_direct_evaluation():
    params = WeibullParams(1.0, 1.0)
    report = run_search(SearchConfig(10, 5, params, iterations=100, seed=3))
    assert report.best_psi == pytest.approx(
        evaluate_criterion(report.best_scheme, params, CriterionSpec.variance()), rel=1e-12
    )


def test_single_iteration():
    report = run_search(SearchConfig(6, 3, WeibullParams(1.0, 1.0), iterations=1, seed=0))
    assert report.n_it == 1
    assert report.n_ac in (0, 1)


def test_fixed_m1():
    report = run_search(SearchConfig(10, 5, WeibullParams(1.0, 1.0), iterations=100, m1=2, seed=4))
    assert report.n_it == 100


def test_multiple_chains_threads_are_reproducible():
    config = SearchConfig(
        12, 4, WeibullParams(1.0, 1.0), iterations=200, seed=9, chains=4, workers=4, trace=True
    )
    first = run_search(config)
    second = run_search(config)
    assert first.n_it == 800
    assert first.chains == 4
    assert first.best_scheme == second.best_scheme
    assert first.n_ac == second.n_ac
    assert {e.chain for e in first.trace} == {0, 1, 2, 3}


def test_shared_evaluator_cache():
    params = WeibullParams(1.0, 1.0)
    evaluator = CriterionEvaluator(params, CriterionSpec.variance())
    report = run_search(SearchConfig(8, 3, params, iterations=500, seed=5), evaluator)
    # CS(8, 3) has only 21 schemes
    assert 0 < len(evaluator) <= 21
    assert report.evaluations == len(evaluator)
    assert evaluator.hits > 0
    again = run_search(SearchConfig(8, 3, params, iterations=500, seed=6), evaluator)
    assert again.evaluations == len(evaluator) <= 21


@pytest.mark.parametrize("kind", list(ProposalKind))
def test_chain_visits_every_scheme(kind):
    params = WeibullParams(1.0, 1.0)
    report = run_search(
        SearchConfig(6, 3, params, proposal=kind, iterations=100_000, seed=13, trace=True)
    )
    visited = {e.scheme.r for e in report.trace if e.accepted}
    assert visited == {s.r for s in enumerate_schemes(6, 3)}
    assert len(visited) == cardinality(6, 3)


@pytest.mark.parametrize("kind", list(ProposalKind))
def test_search_never_beats_exhaustive_optimum(kind):
    params = WeibullParams(1.0, 1.0)
    for n, m in [(8, 4), (10, 5), (12, 3)]:
        oracle = exhaustive_search(n, m, params, CriterionSpec.variance())
        report = run_search(SearchConfig(n, m, params, proposal=kind, iterations=300, seed=11))
        assert report.best_psi >= oracle.best_psi - 1e-12


def test_uniform_search_finds_exhaustive_optimum():
    params = WeibullParams(0.5, 1.0)
    oracle = exhaustive_search(10, 5, params, CriterionSpec.variance())
    report = run_search(
        SearchConfig(10, 5, params, proposal=ProposalKind.UNIFORM, iterations=10000, seed=42)
    )
    assert report.best_scheme == oracle.best_scheme
    assert relative_efficiency(oracle.best_psi, report.best_psi) == 1.0


def test_cost_criterion_search():
    params = WeibullParams(1.0, 1.0)
    criterion = CriterionSpec.cost(c_o=1.0, c_f=0.1, c_t=1.0)
    oracle = exhaustive_search(8, 3, params, criterion)
    report = run_search(
        SearchConfig(8, 3, params, criterion=criterion, proposal=ProposalKind.UNIFORM, iterations=2000)
    )
    assert report.best_scheme == oracle.best_scheme


def test_write_trace(tmp_path):
    config = SearchConfig(10, 5, WeibullParams(1.0, 1.0), iterations=50, seed=8, trace=True)
    report = run_search(config)
    path = tmp_path / "trace.jsonl"
    assert write_trace(report, path) == 50
    records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
    assert len(records) == 50
    assert records[0]["iteration"] == 1
    assert set(records[0]) == {"chain", "iteration", "scheme", "psi", "accepted", "best_psi"}


def test_write_trace_without_tracing(tmp_path):
    report = run_search(SearchConfig(6, 3, WeibullParams(1.0, 1.0), iterations=5))
    with pytest.raises(ValueError):
        write_trace(report, tmp_path / "trace.jsonl")


@pytest.mark.slow
@pytest.mark.parametrize("n, m, params, kind, bound", QUALITY_BOUNDS)
def test_search_quality_against_oracle(n, m, params, kind, bound):
    criterion = CriterionSpec.variance()
    oracle = exhaustive_search(n, m, params, criterion)
    evaluator = CriterionEvaluator(params, criterion)
    good = 0
    for seed in range(20):
        report = run_search(
            SearchConfig(n, m, params, proposal=kind, iterations=10000, seed=seed), evaluator
        )
        if relative_efficiency(oracle.best_psi, report.best_psi) >= bound:
            good += 1
    assert good >= 18


@pytest.mark.slow
def test_large_design_against_long_run():
    params = WeibullParams(1.0, 1.0)
    criterion = CriterionSpec.variance()
    evaluator = CriterionEvaluator(params, criterion)
    long_run = run_search(
        SearchConfig(30, 10, params, proposal=ProposalKind.UNIFORM, iterations=1_000_000, seed=101),
        evaluator,
    )
    assert long_run.best_scheme == Scheme(30, 10, (0, 0, 0, 20) + (0,) * 6)
    assert long_run.best_psi == pytest.approx(0.1655595773, rel=1e-8)

    report = run_search(
        SearchConfig(
            30, 10, params, proposal=ProposalKind.UNIFORM, iterations=100_000, seed=202, chains=4
        ),
        evaluator,
    )
    assert report.best_psi <= long_run.best_psi * 1.001

    reference = evaluator(Scheme.parse(30, 10, "(0^5, 20, 0^4)"))
    assert relative_efficiency(long_run.best_psi, reference) == pytest.approx(0.970166, abs=1e-6)
