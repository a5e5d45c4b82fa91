from __future__ import annotations

import math
from fractions import Fraction

import pytest

from raagtree.core.errors import BadF, DivByZero, NonzeroConstantTerm, TooLarge, TooSmall, UsageError
from raagtree.models.series import BivariateSeries, TruncatedSeries
from raagtree.services import series_engine
from raagtree.services.stirling import StirlingTable


def test_truncated_series_arithmetic():
    z = TruncatedSeries.z(6)
    exp_z = z.exp()
    assert exp_z.coefficients == tuple(Fraction(1, math.factorial(k)) for k in range(7))
    assert (exp_z * (-z).exp()) == TruncatedSeries.one(6)
    assert (z + z * z).coefficients[:3] == (0, 1, 1)
    assert z.shift(2) == TruncatedSeries.monomial(3, 6)
    assert exp_z.derivative() == exp_z.truncate(5)
    assert exp_z.egf_coefficients == (1,) * 7


def test_compose_uses_the_inner_series():
    z = TruncatedSeries.z(5)
    square = z * z
    inner = z + z * z
    assert square.compose(inner).coefficients == (0, 0, 1, 2, 1, 0)
    with pytest.raises(NonzeroConstantTerm):
        square.compose(inner + 1)


def test_exp_requires_zero_constant_term():
    with pytest.raises(NonzeroConstantTerm):
        TruncatedSeries.one(4).exp()


def test_coef_beyond_order_is_an_error():
    with pytest.raises(IndexError):
        TruncatedSeries.z(3).coef(4)
    assert TruncatedSeries.z(3).coef(-1) == 0


def test_cayley_series():
    T = series_engine.cayley_T(8)
    assert [series_engine.egf_count(T, n) for n in range(1, 9)] == [n ** (n - 1) for n in range(1, 9)]
    assert T.power(2).coef(4) == 4
    assert series_engine.cayley_T_fixed_point(8) == T
    U = series_engine.cayley_U(8)
    assert series_engine.egf_count(U, 5) == 125


def test_lagrange_corollary_for_powers_of_t():
    order = 12
    z = TruncatedSeries.z(order)
    for k in range(1, order + 1):
        for n in range(k, order + 1):
            expected = Fraction(k, n) * Fraction(n ** (n - k), math.factorial(n - k))
            assert series_engine.lagrange_coef(z.power(k), z.exp(), n) == expected, (k, n)


def test_lagrange_rejects_bad_input():
    z = TruncatedSeries.z(6)
    with pytest.raises(BadF):
        series_engine.lagrange_coef(z, z, 3)
    with pytest.raises(TooSmall):
        series_engine.lagrange_coef(z, z.exp(), 0)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_psi_closed_forms(k: int):
    assert series_engine.psi(k, 30) == series_engine.psi_closed_form(k, 30)


@pytest.mark.slow
@pytest.mark.parametrize("k", [2, 3])
def test_psi_closed_forms_to_order_sixty(k: int):
    assert series_engine.psi(k, 60) == series_engine.psi_closed_form(k, 60)


def test_small_counts():
    assert series_engine.psi_count(2, 3) == 6
    assert series_engine.psi_count(3, 4) == 24
    assert series_engine.phi_count(1, 4) == 4
    assert series_engine.phi_count(0, 1) == 1


def test_exact_statistics_at_four_nodes():
    assert series_engine.exact_prob_root_deep(4) == Fraction(3, 8)
    assert series_engine.exact_mean_Y(4) == Fraction(3, 8)
    assert series_engine.exact_mean_N_given_deep(4) == 1
    assert series_engine.exact_unrooted_deep_fraction(4) == 0
    assert series_engine.exact_upsilon_per_node(4) == 0
    with pytest.raises(DivByZero):
        series_engine.exact_mean_N_given_deep(3)


def test_exact_query_renders_rational_and_decimal():
    report = series_engine.exact_query("prob-deep-root", 4)
    assert report.value == "3/8"
    assert report.decimal.startswith("0.375")
    assert series_engine.exact_query("psi-coef", 4, 3).value == "24/1"
    with pytest.raises(UsageError):
        series_engine.exact_query("psi-coef", 4)


def test_series_budget(monkeypatch: pytest.MonkeyPatch):
    from raagtree.core.config import get_settings

    monkeypatch.setenv("RAAGTREE_BUDGET", '{"series": 10}')
    get_settings.cache_clear()
    with pytest.raises(TooLarge):
        series_engine.exact_prob_root_deep(11)


def test_stirling_table_and_compositions():
    table = StirlingTable(8)
    assert table(4, 2) == 7
    assert table(5, 3) == 25
    assert table(3, 5) == 0
    assert table.row(3) == [0, 1, 3, 1, 0, 0, 0, 0, 0]
    for n in range(1, 8):
        for k in range(1, n + 1):
            assert StirlingTable.composition_sum(n, k) == math.factorial(k) * table(n, k)
    with pytest.raises(IndexError):
        table(9, 2)


def test_stirling_identities():
    results = series_engine.stirling_identity_results(12)
    assert len(results) == 5
    assert all(results.values()), results
    assert series_engine.stirling_identities_check(12)


def test_bivariate_exp_matches_univariate_rows():
    x = TruncatedSeries.z(6)
    lifted = BivariateSeries.from_x_series(x, y_order=3, y_power=1)
    grid = lifted.exp().grid
    for i in range(4):
        assert grid[i][i] == Fraction(1, math.factorial(i))


def test_constants_match_quoted_decimals():
    table = series_engine.constants(20)
    assert abs(float(table["c3"]) - 0.3522) < 5e-5
    assert abs(float(table["d3"]) - 2.070) < 5e-4
    assert abs(float(table["exp_minus_inv_e"]) - 0.6922) < 5e-5
    assert abs(float(table["unrooted_deep"]) - 0.0976) < 5e-4
    assert abs(float(table["unrooted_upsilon"]) - 0.3134) < 5e-4
    assert table["c3"].render(10).startswith("0.352")


def test_discrepancy_report_prefers_the_leaf_root_corrected_limit():
    report = series_engine.discrepancy_report((20, 40), exhaustive_max=6)
    assert report.supported == "unrooted_upsilon"
    assert [c.name for c in report.candidates][0] == "unrooted_upsilon"
    assert set(report.exhaustive) == {2, 3, 4, 5, 6}
    assert report.exhaustive[4] == "0/1"


@pytest.mark.slow
def test_root_statistics_converge_towards_their_limits():
    table = series_engine.constants(30)
    c3, d3 = float(table["c3"]), float(table["d3"])
    assert abs(float(series_engine.exact_prob_root_deep(400)) - c3) < abs(
        float(series_engine.exact_prob_root_deep(100)) - c3
    )
    assert abs(float(series_engine.exact_mean_N_given_deep(400)) - d3) < abs(
        float(series_engine.exact_mean_N_given_deep(100)) - d3
    )


def test_convergence_table_rows():
    rows = series_engine.convergence_table([4, 3, 4])
    assert [row["n"] for row in rows] == [3, 4]
    assert rows[0]["mean_N_given_deep"] is None
    assert rows[1]["prob_root_deep"] == 0.375
    assert rows[1]["mean_N_given_deep"] == 1.0
    assert rows[1]["deep_fraction"] == 0.0
