from raagtree.models.automorphism import (
    AutMap,
    Automorphism,
    Letter,
    Sym1Element,
    Sym1Generator,
    Whitehead1,
    Whitehead2,
    Word,
)
from raagtree.models.series import BivariateSeries, TruncatedSeries
from raagtree.models.stats import Mode, RootedCounts, SampleTally, Statistic, TreeTally
from raagtree.models.tree import BoundaryProfile, LabeledTree, PruferCode, RootedTree

__all__ = [
    "AutMap",
    "Automorphism",
    "BivariateSeries",
    "BoundaryProfile",
    "LabeledTree",
    "Letter",
    "Mode",
    "PruferCode",
    "RootedCounts",
    "RootedTree",
    "SampleTally",
    "Statistic",
    "Sym1Element",
    "Sym1Generator",
    "TreeTally",
    "TruncatedSeries",
    "Whitehead1",
    "Whitehead2",
    "Word",
]
