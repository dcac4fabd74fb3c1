"""Result models for consensus verdicts, clusters, ensembles and walks."""

from enum import StrEnum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class ConsensusVerdict(BaseModel):
    """Quasi-consensus verdict of one trajectory."""

    status: Literal["quasi_consensus", "not_detected"]
    T: int | None = None
    window: int
    certified: bool = False

    @property
    def reached(self) -> bool:
        return self.status == "quasi_consensus"


class Cluster(BaseModel):
    """Agents chained together by gaps of at most eps."""

    members: list[int]
    mean: float


class ClusterPartition(BaseModel):
    """Clusters ordered by opinion value."""

    epsilon: float
    groups: list[Cluster]

    @property
    def count(self) -> int:
        return len(self.groups)


class Outcome(StrEnum):
    QUASI_CONSENSUS = "quasi_consensus"
    DIVERGED = "diverged"
    UNRESOLVED = "unresolved"


class ReplicateVerdict(BaseModel):
    """Outcome of one ensemble replicate."""

    replicate: int
    verdict: ConsensusVerdict
    outcome: Outcome
    entry_time: int | None = None
    divergence_time: int | None = None
    final_clusters: int
    clamp_events: int = 0


class SweepRow(BaseModel):
    """Aggregated outcome frequencies at one noise ratio."""

    ratio: float
    n: int
    epsilon: float
    replicates: int
    qc_count: int
    div_count: int
    qc_freq: float = Field(..., ge=0.0, le=1.0)
    div_freq: float = Field(..., ge=0.0, le=1.0)
    mean_T: float | None = None
    median_T: float | None = None
    mean_first_div_t: float | None = None
    master_seed: int
    qc_ci: tuple[float, float]
    div_ci: tuple[float, float]


class SweepResult(BaseModel):
    """Rows of a noise-ratio sweep, in the order the ratios were given."""

    rows: list[SweepRow]

    def row(self, ratio: float) -> SweepRow:
        for row in self.rows:
            if row.ratio == ratio:
                return row
        raise KeyError(ratio)


class WalkRecord(BaseModel):
    """Mean-noise random walk of a synchronized cluster.

    eta[k - 1] is the mean noise at step k; S and s2 have horizon + 1 entries
    with S[0] = s2[0] = 0.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    variance: float
    y0_mean: float = 0.0
    eta: np.ndarray
    S: np.ndarray
    s2: np.ndarray

    @property
    def horizon(self) -> int:
        return int(self.eta.size)


class UnclampedRun(BaseModel):
    """Noisy HK run without clamping, with its walk diagnostics."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    walk: WalkRecord
    diameters: np.ndarray
    synchronized_until: int
    closed_form_residual: float
    states: np.ndarray | None = None


class CouplingReport(BaseModel):
    """Clamped run x against the unclamped run y driven by the same noise."""

    steps_compared: int
    upper_clamp_at: int | None = None
    lower_clamp_steps: int = 0
    max_excess: float

    @property
    def upper_clamp_fired(self) -> bool:
        return self.upper_clamp_at is not None
