from __future__ import annotations

import enum
from dataclasses import dataclass, field

MAX_TRACKED_DEPTH = 4


class Statistic(str, enum.Enum):
    DEEP_FRACTION = "deep-fraction"
    UPSILON_PER_NODE = "upsilon-per-node"
    PROB_ROOT_DEEP = "prob-root-deep"
    MEAN_Y = "mean-Y"
    MEAN_N_GIVEN_DEEP = "mean-N-given-deep"
    SHALLOW_FRACTION = "shallow-fraction"
    VANISHING_CLASS_FRACTION = "vanishing-class-fraction"

    @property
    def rooted(self) -> bool:
        return self in {Statistic.PROB_ROOT_DEEP, Statistic.MEAN_Y, Statistic.MEAN_N_GIVEN_DEEP}

    @property
    def per_node(self) -> bool:
        return self in {Statistic.DEEP_FRACTION, Statistic.UPSILON_PER_NODE}


class Mode(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    MONTECARLO = "montecarlo"
    EXACT_SERIES = "exact-series"


@dataclass
class Moments:
    """Integer count / sum / sum of squares of one per-sample quantity."""

    count: int = 0
    total: int = 0
    total_sq: int = 0

    def add(self, value: int) -> None:
        self.count += 1
        self.total += value
        self.total_sq += value * value

    def merge(self, other: Moments) -> None:
        self.count += other.count
        self.total += other.total
        self.total_sq += other.total_sq


@dataclass
class TreeTally:
    """Commutative monoid of exact counts collected while visiting labeled trees.

    Rooted quantities use the childless-node boundary; the ``*_nonleaf`` fields restrict to
    roots of degree at least two, where that boundary coincides with the leaf set.
    """

    trees: int = 0
    deep_total: int = 0
    upsilon_total: int = 0
    shallow_trees: int = 0
    vanishing_trees: int = 0
    rooted_total: int = 0
    rooted_deep: int = 0
    rooted_deep_nonleaf: int = 0
    rooted_y: int = 0
    rooted_y_nonleaf: int = 0
    boundary_at_least: list[int] = field(default_factory=lambda: [0] * (MAX_TRACKED_DEPTH + 1))
    height_at_most: list[int] = field(default_factory=lambda: [0] * (MAX_TRACKED_DEPTH + 1))

    def merge(self, other: TreeTally) -> TreeTally:
        for name in (
            "trees",
            "deep_total",
            "upsilon_total",
            "shallow_trees",
            "vanishing_trees",
            "rooted_total",
            "rooted_deep",
            "rooted_deep_nonleaf",
            "rooted_y",
            "rooted_y_nonleaf",
        ):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.boundary_at_least = [a + b for a, b in zip(self.boundary_at_least, other.boundary_at_least)]
        self.height_at_most = [a + b for a, b in zip(self.height_at_most, other.height_at_most)]
        return self


@dataclass
class SampleTally:
    """Per-statistic moments from Monte Carlo draws (one uniform tree plus one uniform root each)."""

    deep: Moments = field(default_factory=Moments)
    upsilon: Moments = field(default_factory=Moments)
    shallow: Moments = field(default_factory=Moments)
    vanishing: Moments = field(default_factory=Moments)
    root_deep: Moments = field(default_factory=Moments)
    y: Moments = field(default_factory=Moments)
    n_given_deep: Moments = field(default_factory=Moments)

    def merge(self, other: SampleTally) -> SampleTally:
        for name in ("deep", "upsilon", "shallow", "vanishing", "root_deep", "y", "n_given_deep"):
            getattr(self, name).merge(getattr(other, name))
        return self

    def moments_for(self, statistic: Statistic) -> Moments:
        return {
            Statistic.DEEP_FRACTION: self.deep,
            Statistic.UPSILON_PER_NODE: self.upsilon,
            Statistic.SHALLOW_FRACTION: self.shallow,
            Statistic.VANISHING_CLASS_FRACTION: self.vanishing,
            Statistic.PROB_ROOT_DEEP: self.root_deep,
            Statistic.MEAN_Y: self.y,
            Statistic.MEAN_N_GIVEN_DEEP: self.n_given_deep,
        }[statistic]


@dataclass(frozen=True)
class RootedCounts:
    n: int
    total: int
    boundary_at_least: tuple[int, ...]
    height_at_most: tuple[int, ...]
