from raagtree.schemas.reports import (
    BridgeReport,
    DiscrepancyReport,
    ExactReport,
    H1Result,
    InvariantsReport,
    LimitCandidate,
    RunConfig,
    StatReport,
    SuiteResult,
    TheoremAReport,
    VanishingItem,
    VanishingReport,
)

__all__ = [
    "BridgeReport",
    "DiscrepancyReport",
    "ExactReport",
    "H1Result",
    "InvariantsReport",
    "LimitCandidate",
    "RunConfig",
    "StatReport",
    "SuiteResult",
    "TheoremAReport",
    "VanishingItem",
    "VanishingReport",
]
