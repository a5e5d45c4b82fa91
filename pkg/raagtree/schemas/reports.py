from __future__ import annotations

from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from raagtree.models.stats import Mode, Statistic


def fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class StatReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    statistic: Statistic
    n: int
    mode: Mode
    value: Fraction | float
    stderr: float | None = None
    ci95: tuple[float, float] | None = None
    samples: int
    seed: int | None = None
    workers: int | None = None

    @model_validator(mode="after")
    def check_mode_shape(self) -> StatReport:
        if self.mode in (Mode.EXHAUSTIVE, Mode.EXACT_SERIES):
            if not isinstance(self.value, Fraction):
                raise ValueError(f"{self.mode.value} reports carry an exact rational value")
            if self.stderr is not None or self.ci95 is not None:
                raise ValueError(f"{self.mode.value} reports carry no interval")
        return self

    @field_serializer("value")
    def serialize_value(self, value: Fraction | float) -> str | float:
        return fraction_str(value) if isinstance(value, Fraction) else value

    @property
    def decimal(self) -> float:
        return float(self.value)

    def covers(self, exact: Fraction) -> bool:
        if self.ci95 is None:
            return self.value == exact
        low, high = self.ci95
        return low <= float(exact) <= high

    def as_record(self) -> dict[str, Any]:
        record = self.model_dump(mode="json")
        record["decimal"] = self.decimal
        return record


class BridgeReport(BaseModel):
    n: int
    unrooted_deep_total: int
    rooted_deep_total: int
    rooted_deep_nonleaf_root: int
    leaf_root_surplus: int
    upsilon_total: int
    rooted_y_total: int
    rooted_y_nonleaf_root: int
    leaf_root_y_surplus: int

    @property
    def holds(self) -> bool:
        return (
            self.unrooted_deep_total == self.rooted_deep_nonleaf_root
            and self.upsilon_total == self.rooted_y_nonleaf_root
        )

    @property
    def literal_holds(self) -> bool:
        """The identity read with every rooted tree counted, leaf roots included."""
        return self.unrooted_deep_total == self.rooted_deep_total and self.upsilon_total == self.rooted_y_total

    def as_record(self) -> dict[str, Any]:
        record = self.model_dump(mode="json")
        record["holds"] = self.holds
        record["literal_holds"] = self.literal_holds
        return record


class InvariantsReport(BaseModel):
    n: int
    deep: list[int]
    upsilon: int
    shallow: bool
    betti_lower_bound: int
    distances: list[int]
    vanishing_class: bool
    equivalence_classes: list[list[int]]


class ExactReport(BaseModel):
    statistic: str
    n: int
    k: int | None = None
    value: str
    decimal: str
    mode: Mode = Mode.EXACT_SERIES


class H1Result(BaseModel):
    b1: int
    torsion: list[int] = Field(default_factory=list)
    generators: int
    relators: int
    rows: int
    rank: int
    schema_counts: dict[str, int] = Field(default_factory=dict)


class TheoremAReport(BaseModel):
    n: int
    upsilon: int
    b1: int
    omega_size: int
    omega_rank: int
    phi_kills_relators: bool

    @property
    def holds(self) -> bool:
        return (
            self.b1 >= self.upsilon
            and self.omega_size == self.upsilon
            and self.omega_rank == self.omega_size
            and self.phi_kills_relators
        )


class VanishingItem(BaseModel):
    case: str
    generator: dict[str, Any]
    vanishes: bool


class VanishingReport(BaseModel):
    n: int
    items: list[VanishingItem] = Field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(item.vanishes for item in self.items)


class SuiteResult(BaseModel):
    suite: str
    passed: bool
    metrics: dict[str, Any] = Field(default_factory=dict)
    failures: list[dict[str, Any]] = Field(default_factory=list)


class LimitCandidate(BaseModel):
    name: str
    value: float
    distance_at_largest_n: float


class DiscrepancyReport(BaseModel):
    quantity: str
    exhaustive: dict[int, str]
    series: dict[int, float]
    candidates: list[LimitCandidate]
    supported: str
    approaching: bool


class RunConfig(BaseModel):
    subcommand: str
    n: int | None = None
    k: int | None = None
    seed: int | None = None
    samples: int | None = None
    statistic: str | None = None
    suite: str | None = None
    input: str | None = None
    output_format: str = "json"
    precision: int | None = None
    workers: int = 1
    budgets: dict[str, int] = Field(default_factory=dict)
    version: str
    timestamp: str | None = None

    def as_record(self) -> dict[str, Any]:
        record = {"record": "config"}
        record.update(self.model_dump(mode="json", exclude_none=True))
        return record
