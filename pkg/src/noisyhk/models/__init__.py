"""Data models for noisyhk."""

from .manifest import OutputFile, RunManifest
from .results import (
    Cluster,
    ClusterPartition,
    ConsensusVerdict,
    CouplingReport,
    Outcome,
    ReplicateVerdict,
    SweepResult,
    SweepRow,
    UnclampedRun,
    WalkRecord,
)
from .state import (
    ROUNDING_SLACK,
    OpinionState,
    PreClampState,
    check_epsilon,
    confidence_limit,
)
from .trajectory import BoundaryHitLog, Trajectory

__all__ = [
    "ROUNDING_SLACK",
    "BoundaryHitLog",
    "Cluster",
    "ClusterPartition",
    "ConsensusVerdict",
    "CouplingReport",
    "OpinionState",
    "Outcome",
    "OutputFile",
    "PreClampState",
    "ReplicateVerdict",
    "RunManifest",
    "SweepResult",
    "SweepRow",
    "Trajectory",
    "UnclampedRun",
    "WalkRecord",
    "check_epsilon",
    "confidence_limit",
]
