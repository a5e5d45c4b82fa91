from __future__ import annotations

import pytest

from raagtree.services.verification import MONTECARLO_FIRST_N, SUITES, VerificationService, distinct_trees


def _light(**options) -> VerificationService:
    return VerificationService(workers=1, repetitions=20, samples=2000, min_coverage=0.75, **options)


def test_distinct_trees_one_per_isomorphism_class():
    assert [sum(1 for _ in distinct_trees(n)) for n in range(1, 8)] == [1, 1, 1, 2, 3, 6, 11]


def test_acceptance_defaults():
    service = VerificationService()
    assert (service.repetitions, service.samples, service.min_coverage) == (100, 100_000, 0.9)


def test_series_suite_passes():
    result = VerificationService().verify_series(order=12, closed_order=20, lagrange_max=10)
    assert result.passed, result.failures
    assert result.metrics["stirling_identities"] == 5
    assert result.metrics["fixed_point"] is True


def test_relators_suite_through_five_nodes():
    result = VerificationService(max_n=5).run("relators")[0]
    assert result.passed, result.failures[:3]
    assert result.metrics["trees"] == 7
    assert result.metrics["instances"]["R1"] > 0
    assert result.metrics["instances"]["R6'"] > 0


def test_montecarlo_suite_starts_where_deep_nodes_appear():
    result = _light(max_n=4).run("montecarlo")[0]
    assert result.passed, result.failures
    assert set(result.metrics["coverage"]) == {
        f"deep-fraction@{MONTECARLO_FIRST_N}",
        f"upsilon-per-node@{MONTECARLO_FIRST_N}",
    }


@pytest.mark.slow
def test_montecarlo_coverage_through_eight_nodes():
    result = _light(max_n=8).run("montecarlo")[0]
    assert result.passed, result.failures
    assert sorted(result.metrics["coverage"]) == [
        "deep-fraction@7",
        "deep-fraction@8",
        "upsilon-per-node@7",
        "upsilon-per-node@8",
    ]
    assert all(rate >= 0.75 for rate in result.metrics["coverage"].values())


@pytest.mark.slow
def test_verify_all_small():
    results = _light(max_n=5).verify_all()
    assert [r.suite for r in results] == list(SUITES)
    assert all(r.passed for r in results), [r.failures[:3] for r in results if not r.passed]
