from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from raagtree.core.errors import NonzeroConstantTerm

Scalar = int | Fraction


def _factorials(order: int) -> list[int]:
    table = [1] * (order + 1)
    for i in range(1, order + 1):
        table[i] = table[i - 1] * i
    return table


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Power series c_0 + c_1 z + ... + c_order z^order with exact rational coefficients.

    Binary operations truncate to the smaller operand order. Products and exponentials are
    carried out on the n!-scaled coefficients: every tree series used here is integral in
    that form, so the rational arithmetic never meets large denominators.
    """

    coefficients: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise ValueError("a truncated series needs at least the constant coefficient")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def from_egf(cls, values: Sequence[Scalar], order: int | None = None) -> TruncatedSeries:
        order = len(values) - 1 if order is None else order
        facts = _factorials(order)
        coefficients = [Fraction(values[i]) / facts[i] if i < len(values) else Fraction(0) for i in range(order + 1)]
        return cls(tuple(coefficients))

    @classmethod
    def zero(cls, order: int) -> TruncatedSeries:
        return cls((Fraction(0),) * (order + 1))

    @classmethod
    def constant(cls, value: Scalar, order: int) -> TruncatedSeries:
        return cls((Fraction(value),) + (Fraction(0),) * order)

    @classmethod
    def one(cls, order: int) -> TruncatedSeries:
        return cls.constant(1, order)

    @classmethod
    def monomial(cls, k: int, order: int, value: Scalar = 1) -> TruncatedSeries:
        coefficients = [Fraction(0)] * (order + 1)
        if k <= order:
            coefficients[k] = Fraction(value)
        return cls(tuple(coefficients))

    @classmethod
    def z(cls, order: int) -> TruncatedSeries:
        return cls.monomial(1, order)

    def coef(self, n: int) -> Fraction:
        if n < 0:
            return Fraction(0)
        if n > self.order:
            raise IndexError(f"coefficient {n} is beyond the truncation order {self.order}")
        return self.coefficients[n]

    @cached_property
    def egf_coefficients(self) -> tuple[Fraction, ...]:
        """n! * c_n for every n."""
        facts = _factorials(self.order)
        return tuple(c * f for c, f in zip(self.coefficients, facts))

    def truncate(self, order: int) -> TruncatedSeries:
        if order >= self.order:
            return self
        return TruncatedSeries(self.coefficients[: order + 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash(self.coefficients)

    def __add__(self, other: TruncatedSeries | Scalar) -> TruncatedSeries:
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(other, self.order)
        order = min(self.order, other.order)
        return TruncatedSeries(tuple(a + b for a, b in zip(self.coefficients[: order + 1], other.coefficients)))

    __radd__ = __add__

    def __neg__(self) -> TruncatedSeries:
        return TruncatedSeries(tuple(-c for c in self.coefficients))

    def __sub__(self, other: TruncatedSeries | Scalar) -> TruncatedSeries:
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(other, self.order)
        return self + (-other)

    def __rsub__(self, other: Scalar) -> TruncatedSeries:
        return (-self) + other

    def scale(self, factor: Scalar) -> TruncatedSeries:
        factor = Fraction(factor)
        return TruncatedSeries(tuple(c * factor for c in self.coefficients))

    def __mul__(self, other: TruncatedSeries | Scalar) -> TruncatedSeries:
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        order = min(self.order, other.order)
        left, right = self.egf_coefficients, other.egf_coefficients
        facts = _factorials(order)
        product: list[Fraction] = []
        for n in range(order + 1):
            acc = Fraction(0)
            for k in range(n + 1):
                a = left[k]
                if a:
                    b = right[n - k]
                    if b:
                        acc += math.comb(n, k) * a * b
            product.append(acc / facts[n])
        return TruncatedSeries(tuple(product))

    __rmul__ = __mul__

    def shift(self, k: int = 1) -> TruncatedSeries:
        """Multiply by z^k, keeping the order."""
        if k <= 0:
            return self
        return TruncatedSeries(((Fraction(0),) * k + self.coefficients)[: self.order + 1])

    def derivative(self) -> TruncatedSeries:
        if self.order == 0:
            return TruncatedSeries.zero(0)
        return TruncatedSeries(tuple(n * self.coefficients[n] for n in range(1, self.order + 1)))

    def power(self, k: int) -> TruncatedSeries:
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = TruncatedSeries.one(self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exp(self) -> TruncatedSeries:
        if self.coefficients[0] != 0:
            raise NonzeroConstantTerm("exp needs a zero constant term to stay rational; factor e^c out first")
        # (e^a)' = a' e^a in n!-scaled form: E_k = sum_j C(k-1, j-1) A_j E_{k-j}
        scaled = self.egf_coefficients
        support = [j for j in range(1, self.order + 1) if scaled[j]]
        result: list[Fraction] = [Fraction(1)]
        for k in range(1, self.order + 1):
            acc = Fraction(0)
            for j in support:
                if j > k:
                    break
                acc += math.comb(k - 1, j - 1) * scaled[j] * result[k - j]
            result.append(acc)
        return TruncatedSeries.from_egf(result, self.order)

    def compose(self, inner: TruncatedSeries) -> TruncatedSeries:
        """self(inner(z)); the inner series must vanish at 0."""
        if inner.coefficients[0] != 0:
            raise NonzeroConstantTerm("compose needs an inner series with zero constant term")
        order = min(self.order, inner.order)
        result = TruncatedSeries.constant(self.coefficients[order], order)
        for c in reversed(self.coefficients[:order]):
            result = result * inner + c
        return result

    def __repr__(self) -> str:
        shown = ", ".join(str(c) for c in self.coefficients[:6])
        tail = ", ..." if self.order >= 6 else ""
        return f"TruncatedSeries(order={self.order}, [{shown}{tail}])"


def _poly_mul(left: Sequence[Fraction], right: Sequence[Fraction], degree: int) -> list[Fraction]:
    out = [Fraction(0)] * (degree + 1)
    for i, a in enumerate(left):
        if not a:
            continue
        for j in range(min(len(right), degree + 1 - i)):
            b = right[j]
            if b:
                out[i + j] += a * b
    return out


@dataclass(frozen=True)
class BivariateSeries:
    """Series in x whose coefficients are polynomials in y, both truncated.

    ``grid[i][j]`` is the coefficient of x^i y^j.
    """

    grid: tuple[tuple[Fraction, ...], ...]

    @property
    def x_order(self) -> int:
        return len(self.grid) - 1

    @property
    def y_order(self) -> int:
        return len(self.grid[0]) - 1

    @classmethod
    def zero(cls, x_order: int, y_order: int) -> BivariateSeries:
        return cls(tuple((Fraction(0),) * (y_order + 1) for _ in range(x_order + 1)))

    @classmethod
    def from_function(cls, x_order: int, y_order: int, entry) -> BivariateSeries:
        return cls(
            tuple(tuple(Fraction(entry(i, j)) for j in range(y_order + 1)) for i in range(x_order + 1))
        )

    @classmethod
    def from_x_series(cls, series: TruncatedSeries, y_order: int, y_power: int = 0) -> BivariateSeries:
        rows = []
        for c in series.coefficients:
            row = [Fraction(0)] * (y_order + 1)
            if y_power <= y_order:
                row[y_power] = c
            rows.append(tuple(row))
        return cls(tuple(rows))

    def _aligned(self, other: BivariateSeries) -> tuple[int, int]:
        return min(self.x_order, other.x_order), min(self.y_order, other.y_order)

    def __add__(self, other: BivariateSeries) -> BivariateSeries:
        xo, yo = self._aligned(other)
        return BivariateSeries(
            tuple(tuple(self.grid[i][j] + other.grid[i][j] for j in range(yo + 1)) for i in range(xo + 1))
        )

    def __sub__(self, other: BivariateSeries) -> BivariateSeries:
        return self + other.scale(-1)

    def scale(self, factor: Scalar) -> BivariateSeries:
        factor = Fraction(factor)
        return BivariateSeries(tuple(tuple(c * factor for c in row) for row in self.grid))

    def __mul__(self, other: BivariateSeries) -> BivariateSeries:
        xo, yo = self._aligned(other)
        rows = []
        for n in range(xo + 1):
            acc = [Fraction(0)] * (yo + 1)
            for k in range(n + 1):
                part = _poly_mul(self.grid[k], other.grid[n - k], yo)
                acc = [a + b for a, b in zip(acc, part)]
            rows.append(tuple(acc))
        return BivariateSeries(tuple(rows))

    def exp(self) -> BivariateSeries:
        if any(self.grid[0]):
            raise NonzeroConstantTerm("exp needs the x^0 row to vanish")
        xo, yo = self.x_order, self.y_order
        facts = _factorials(xo)
        scaled = [[c * facts[i] for c in row] for i, row in enumerate(self.grid)]
        result: list[list[Fraction]] = [[Fraction(1)] + [Fraction(0)] * yo]
        for k in range(1, xo + 1):
            acc = [Fraction(0)] * (yo + 1)
            for j in range(1, k + 1):
                part = _poly_mul(scaled[j], result[k - j], yo)
                weight = math.comb(k - 1, j - 1)
                acc = [a + weight * b for a, b in zip(acc, part)]
            result.append(acc)
        return BivariateSeries(tuple(tuple(c / facts[i] for c in row) for i, row in enumerate(result)))

    def truncate(self, x_order: int, y_order: int) -> BivariateSeries:
        return BivariateSeries(tuple(row[: y_order + 1] for row in self.grid[: x_order + 1]))
