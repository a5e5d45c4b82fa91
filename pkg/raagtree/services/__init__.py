from raagtree.services.homology import Presentation, UnitPivotLattice
from raagtree.services.stirling import StirlingTable
from raagtree.services.storage import ArtifactStore
from raagtree.services.verification import VerificationService
from raagtree.services.worker import PartitionRunner

__all__ = [
    "ArtifactStore",
    "PartitionRunner",
    "Presentation",
    "StirlingTable",
    "UnitPivotLattice",
    "VerificationService",
]
