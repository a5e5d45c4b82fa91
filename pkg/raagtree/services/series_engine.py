from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import mp, mpf

from raagtree.core.config import get_settings
from raagtree.core.errors import BadF, DivByZero, TooLarge, TooSmall, UsageError
from raagtree.core.metrics import SERIES_OPERATIONS
from raagtree.models.series import BivariateSeries, TruncatedSeries
from raagtree.models.stats import Mode, Statistic
from raagtree.schemas.reports import (
    DiscrepancyReport,
    ExactReport,
    LimitCandidate,
    StatReport,
    fraction_str,
)
from raagtree.services.stirling import StirlingTable, stirling_table

logger = logging.getLogger(__name__)


def _check_order(n: int, budget: int | None = None) -> None:
    limit = budget if budget is not None else get_settings().series_max_order
    if n > limit:
        raise TooLarge(f"series order {n} exceeds the budget of {limit}")


def _z(order: int) -> TruncatedSeries:
    return TruncatedSeries.z(order)


@lru_cache(maxsize=16)
def cayley_T(order: int) -> TruncatedSeries:
    """Rooted labeled trees: coef_n = n^(n-1)/n!."""
    if order < 0:
        raise ValueError("order must be non-negative")
    return TruncatedSeries.from_egf([0] + [n ** (n - 1) for n in range(1, order + 1)], order)


def cayley_U(order: int) -> TruncatedSeries:
    """Unrooted labeled trees: coef_n = n^(n-2)/n!, with the single-node tree counted once."""
    return TruncatedSeries.from_egf([0, 1] + [n ** (n - 2) for n in range(2, order + 1)], order)


def cayley_T_fixed_point(order: int) -> TruncatedSeries:
    """Iterate T <- z e^T; each pass fixes one more coefficient."""
    current = TruncatedSeries.zero(order)
    for _ in range(order):
        current = current.exp().shift(1)
        SERIES_OPERATIONS.labels(kind="exp").inc()
    return current


def lagrange_coef(g: TruncatedSeries, f: TruncatedSeries, n: int) -> Fraction:
    """coef_n[g(h)] for h = z f(h), read off as coef_{n-1}[g' f^n / n]."""
    if f.coef(0) == 0:
        raise BadF("Lagrange inversion needs f(0) != 0")
    if n < 1:
        raise TooSmall("Lagrange inversion reads coefficients n >= 1")
    if g.order < n or f.order < n - 1:
        raise TooSmall(f"series are truncated below the order needed for coefficient {n}")
    SERIES_OPERATIONS.labels(kind="lagrange").inc()
    product = g.derivative().truncate(n - 1) * f.truncate(n - 1).power(n)
    return product.coef(n - 1) / n


@lru_cache(maxsize=64)
def psi(k: int, order: int) -> TruncatedSeries:
    """Rooted trees with root boundary distance at least k: Psi_0 = T, Psi_k = z (e^Psi_{k-1} - 1)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return cayley_T(order)
    SERIES_OPERATIONS.labels(kind="psi").inc()
    previous = psi(k - 1, order)
    return (previous.exp() - 1).shift(1)


@lru_cache(maxsize=64)
def phi(k: int, order: int) -> TruncatedSeries:
    """Rooted trees of height at most k: Phi_0 = z, Phi_k = z e^Phi_{k-1}."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return _z(order)
    SERIES_OPERATIONS.labels(kind="phi").inc()
    return phi(k - 1, order).exp().shift(1)


def psi_closed_form(k: int, order: int) -> TruncatedSeries:
    T = cayley_T(order)
    z = _z(order)
    if k == 0:
        return T
    if k == 1:
        return T - z
    exp_minus_z = (-z).exp()
    if k == 2:
        return T * exp_minus_z - z
    if k == 3:
        return (T * exp_minus_z).exp().shift(1) * exp_minus_z - z
    raise ValueError("closed forms are known for k <= 3 only")


@lru_cache(maxsize=16)
def weighted_second_generation(order: int) -> TruncatedSeries:
    """Sum over rooted trees with deep root of the second-generation size.

    W = z^2 Psi_1 e^Psi_1 e^Psi_2: one marked grandchild below a child, with the child's other
    subtrees and the remaining root subtrees all non-leaf.
    """
    first = psi(1, order)
    return (first * first.exp() * psi(2, order).exp()).shift(2)


def leaf_root_deep_series(order: int) -> TruncatedSeries:
    """Rooted trees whose root is a leaf and yet has boundary distance >= 3."""
    return psi(2, order).shift(1)


def leaf_root_weighted_series(order: int) -> TruncatedSeries:
    first = psi(1, order)
    return (first * first.exp()).shift(2)


def egf_count(series: TruncatedSeries, n: int) -> int:
    value = series.coef(n) * math.factorial(n)
    if value.denominator != 1:
        raise ValueError(f"coefficient {n} does not count labeled objects: {value}")
    return value.numerator


def psi_count(k: int, n: int) -> int:
    _check_order(n)
    return egf_count(psi(k, n), n)


def phi_count(k: int, n: int) -> int:
    _check_order(n)
    return egf_count(phi(k, n), n)


def _rooted_normaliser(n: int) -> int:
    return n ** (n - 1)


def exact_prob_root_deep(n: int) -> Fraction:
    if n < 1:
        raise TooSmall("n must be at least 1")
    _check_order(n)
    return Fraction(egf_count(psi(3, n), n), _rooted_normaliser(n))


def exact_mean_Y(n: int) -> Fraction:
    if n < 1:
        raise TooSmall("n must be at least 1")
    _check_order(n)
    return Fraction(egf_count(weighted_second_generation(n), n), _rooted_normaliser(n))


def exact_mean_N_given_deep(n: int) -> Fraction:
    probability = exact_prob_root_deep(n)
    if probability == 0:
        raise DivByZero(f"no rooted tree on {n} nodes has a deep root")
    return exact_mean_Y(n) / probability


def exact_unrooted_deep_fraction(n: int) -> Fraction:
    """E|D(T)|/n over uniform unrooted trees; deep nodes are never leaves once n >= 3."""
    if n < 1:
        raise TooSmall("n must be at least 1")
    _check_order(n)
    nonleaf = psi(3, n) - leaf_root_deep_series(n)
    return Fraction(egf_count(nonleaf, n), _rooted_normaliser(n))


def exact_upsilon_per_node(n: int) -> Fraction:
    if n < 1:
        raise TooSmall("n must be at least 1")
    _check_order(n)
    nonleaf = weighted_second_generation(n) - leaf_root_weighted_series(n)
    return Fraction(egf_count(nonleaf, n), _rooted_normaliser(n))


EXACT_STATISTICS: dict[Statistic, Callable[[int], Fraction]] = {
    Statistic.DEEP_FRACTION: exact_unrooted_deep_fraction,
    Statistic.UPSILON_PER_NODE: exact_upsilon_per_node,
    Statistic.PROB_ROOT_DEEP: exact_prob_root_deep,
    Statistic.MEAN_Y: exact_mean_Y,
    Statistic.MEAN_N_GIVEN_DEEP: exact_mean_N_given_deep,
}


def exact_report(statistic: Statistic | str, n: int) -> StatReport:
    statistic = Statistic(statistic)
    compute = EXACT_STATISTICS.get(statistic)
    if compute is None:
        raise UsageError(f"{statistic.value} has no generating-function formula", flag="--stat")
    value = compute(n)
    return StatReport(
        statistic=statistic,
        n=n,
        mode=Mode.EXACT_SERIES,
        value=value,
        samples=n ** (n - 1) if statistic.rooted else n ** (n - 2) if n >= 2 else 1,
    )


# CLI names for the `exact` subcommand.
EXACT_QUERIES = (
    "prob-deep-root",
    "mean-y",
    "mean-n-given-deep",
    "deep-fraction",
    "upsilon-per-node",
    "psi-coef",
    "phi-coef",
)


def exact_query(name: str, n: int, k: int | None = None) -> ExactReport:
    if name in ("psi-coef", "phi-coef"):
        if k is None or k < 0:
            raise UsageError(f"{name} needs --k >= 0", flag="--k")
        count = psi_count(k, n) if name == "psi-coef" else phi_count(k, n)
        value = Fraction(count)
    else:
        simple = {
            "prob-deep-root": exact_prob_root_deep,
            "mean-y": exact_mean_Y,
            "mean-n-given-deep": exact_mean_N_given_deep,
            "deep-fraction": exact_unrooted_deep_fraction,
            "upsilon-per-node": exact_upsilon_per_node,
        }
        if name not in simple:
            raise UsageError(f"unknown statistic {name!r}; expected one of {', '.join(EXACT_QUERIES)}", flag="--stat")
        value = simple[name](n)
    with mp.workdps(30):
        decimal = mp.nstr(mpf(value.numerator) / value.denominator, 20)
    return ExactReport(statistic=name, n=n, k=k, value=fraction_str(value), decimal=decimal)


@dataclass(frozen=True)
class Constant:
    name: str
    value: mpf
    digits: int

    def render(self, digits: int | None = None) -> str:
        digits = digits or self.digits
        with mp.workdps(digits + 5):
            return mp.nstr(self.value, digits, strip_zeros=False)

    def __float__(self) -> float:
        return float(self.value)


CONSTANT_NAMES = (
    "c3",
    "d3",
    "exp_minus_inv_e",
    "c3_d3",
    "leaf_root_deep",
    "unrooted_deep",
    "unrooted_upsilon",
)


def constants(digits: int = 50) -> dict[str, Constant]:
    if digits < 1:
        raise ValueError("digits must be positive")
    with mp.workdps(digits + 15):
        inv_e = 1 / mp.e
        c3 = inv_e * mp.exp(-inv_e) * mp.exp((mp.exp(1 - inv_e) - 1) / mp.e)
        d3 = 2 - inv_e + inv_e * (1 - inv_e) * mp.exp(1 - inv_e)
        leaf_root = mp.exp(-1 - inv_e)
        values = {
            "c3": c3,
            "d3": d3,
            "exp_minus_inv_e": mp.exp(-inv_e),
            "c3_d3": c3 * d3,
            "leaf_root_deep": leaf_root,
            "unrooted_deep": c3 - leaf_root,
            "unrooted_upsilon": c3 * d3 - leaf_root * (2 - inv_e),
        }
    return {name: Constant(name=name, value=values[name], digits=digits) for name in CONSTANT_NAMES}


def stirling_identity_results(order: int) -> dict[str, bool]:
    """Checks each Stirling generating-function identity as a truncated series equality."""
    if order < 1:
        raise TooSmall("order must be at least 1")
    table = stirling_table(order + 1)
    facts = [math.factorial(i) for i in range(order + 2)]
    x = _z(order)
    exp_x_minus_one = x.exp() - 1

    # sum_n S(n,k) x^n/n! = (e^x - 1)^k / k!
    fixed_k = True
    power = TruncatedSeries.one(order)
    for k in range(order + 1):
        lhs = TruncatedSeries.from_egf([table(n, k) for n in range(order + 1)], order)
        if lhs != power.scale(Fraction(1, facts[k])):
            fixed_k = False
            break
        power = power * exp_x_minus_one

    # k! S(n,k) as a sum over compositions of n into k positive parts
    compositions = all(
        StirlingTable.composition_sum(n, k) == facts[k] * table(n, k)
        for n in range(1, order + 1)
        for k in range(1, n + 1)
    )

    inner = BivariateSeries.from_x_series(exp_x_minus_one, order, y_power=1)
    generating = inner.exp()
    bivariate = generating == BivariateSeries.from_function(order, order, lambda i, j: Fraction(table(i, j), facts[i]))

    # d/dx: y e^x e^{y(e^x - 1)}
    y_exp_x = BivariateSeries.from_x_series(x.exp(), order, y_power=1)
    first_rhs = y_exp_x * generating
    first_lhs = BivariateSeries.from_function(order, order, lambda i, j: Fraction(table(i + 1, j), facts[i]))
    first_derivative = first_rhs == first_lhs

    # d/dx of x times the above: y e^x e^{y(e^x - 1)} (1 + x + x y e^x)
    bracket = (
        BivariateSeries.from_x_series(TruncatedSeries.one(order) + x, order)
        + BivariateSeries.from_x_series(x.exp().shift(1), order, y_power=1)
    )
    second_lhs = BivariateSeries.from_function(
        order, order, lambda i, j: Fraction(table(i + 1, j) * (i + 1), facts[i])
    )
    second_derivative = first_rhs * bracket == second_lhs

    results = {
        "fixed_k": fixed_k,
        "compositions": compositions,
        "bivariate": bivariate,
        "first_derivative": first_derivative,
        "second_derivative": second_derivative,
    }
    failed = [name for name, ok in results.items() if not ok]
    if failed:
        logger.warning("stirling_identity_failed", extra={"order": order, "identities": failed})
    return results


def stirling_identities_check(order: int) -> bool:
    return all(stirling_identity_results(order).values())


def convergence_table(ns: Iterable[int]) -> list[dict[str, object]]:
    rows: list[dict[str, object]] = []
    for n in sorted(set(ns)):
        row: dict[str, object] = {"n": n}
        for key, compute in (
            ("prob_root_deep", exact_prob_root_deep),
            ("mean_Y", exact_mean_Y),
            ("mean_N_given_deep", exact_mean_N_given_deep),
            ("deep_fraction", exact_unrooted_deep_fraction),
            ("upsilon_per_node", exact_upsilon_per_node),
        ):
            try:
                row[key] = float(compute(n))
            except DivByZero:
                row[key] = None
        rows.append(row)
        logger.info("convergence_row", extra=row)
    return rows


_DISCREPANCY_QUANTITIES: dict[str, tuple[Statistic, tuple[str, ...]]] = {
    "upsilon-per-node": (Statistic.UPSILON_PER_NODE, ("d3", "c3_d3", "unrooted_upsilon")),
    "deep-fraction": (Statistic.DEEP_FRACTION, ("c3", "unrooted_deep")),
}


def discrepancy_report(
    ns: Iterable[int] = (50, 100, 200, 400),
    *,
    exhaustive_max: int = 8,
    quantity: str = "upsilon-per-node",
) -> DiscrepancyReport:
    """Compares the exact per-node sequence against each candidate limit."""
    from raagtree.services import enumeration

    if quantity not in _DISCREPANCY_QUANTITIES:
        raise UsageError(f"unknown quantity {quantity!r}", flag="--quantity")
    statistic, names = _DISCREPANCY_QUANTITIES[quantity]
    ns = sorted(set(ns))
    if not ns:
        raise UsageError("at least one n is needed", flag="--n")

    exhaustive = {
        n: fraction_str(enumeration.estimate(statistic, n, Mode.EXHAUSTIVE).value)
        for n in range(2, exhaustive_max + 1)
    }
    compute = EXACT_STATISTICS[statistic]
    series = {n: float(compute(n)) for n in ns}

    table = constants(30)
    largest = series[ns[-1]]
    candidates = sorted(
        (LimitCandidate(name=name, value=float(table[name]), distance_at_largest_n=abs(largest - float(table[name])))
         for name in names),
        key=lambda c: c.distance_at_largest_n,
    )
    supported = candidates[0]
    approaching = True
    if len(ns) >= 2:
        before = abs(series[ns[-2]] - supported.value)
        approaching = supported.distance_at_largest_n < before
    report = DiscrepancyReport(
        quantity=quantity,
        exhaustive=exhaustive,
        series=series,
        candidates=candidates,
        supported=supported.name,
        approaching=approaching,
    )
    logger.info("discrepancy_report", extra={"quantity": quantity, "supported": supported.name})
    return report
