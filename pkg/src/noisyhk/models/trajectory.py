"""Trajectory and boundary-hit models."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from noisyhk.dynamics.noise import NoiseModel, ZeroNoise

Boundary = Literal["lower", "upper"]


class BoundaryHitLog(BaseModel):
    """Per-agent steps at which the clamp at 0 (lower) or 1 (upper) fired."""

    lower: list[list[int]]
    upper: list[list[int]]

    @classmethod
    def empty(cls, n: int) -> "BoundaryHitLog":
        return cls(lower=[[] for _ in range(n)], upper=[[] for _ in range(n)])

    @property
    def n(self) -> int:
        return len(self.lower)

    def record(self, t: int, lower_agents: np.ndarray, upper_agents: np.ndarray) -> None:
        for agent in lower_agents.tolist():
            self.lower[agent].append(t)
        for agent in upper_agents.tolist():
            self.upper[agent].append(t)

    @property
    def total(self) -> int:
        return sum(len(steps) for steps in self.lower) + sum(len(steps) for steps in self.upper)

    def hits_both(self) -> bool:
        """True when every agent hit both boundaries at least once."""
        return all(lo and hi for lo, hi in zip(self.lower, self.upper, strict=True))

    def events(self) -> list[tuple[int, int, Boundary]]:
        """All events as (t, agent, boundary), ordered by step then agent."""
        rows: list[tuple[int, int, Boundary]] = []
        for agent, steps in enumerate(self.lower):
            rows.extend((t, agent, "lower") for t in steps)
        for agent, steps in enumerate(self.upper):
            rows.extend((t, agent, "upper") for t in steps)
        return sorted(rows)


class Trajectory(BaseModel):
    """Diagnostics of one run over steps 0..horizon.

    Per-step arrays have horizon + 1 entries indexed by t. Noise arrays have
    horizon rows; row t - 1 holds the draws applied to produce step t.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    epsilon: float
    horizon: int = Field(..., ge=0)
    noise_model: NoiseModel = Field(default_factory=ZeroNoise)
    diameters: np.ndarray
    n_clusters: np.ndarray
    minima: np.ndarray
    maxima: np.ndarray
    initial: np.ndarray
    final: np.ndarray
    boundary_hits: BoundaryHitLog
    states: np.ndarray | None = None
    noise_draws: np.ndarray | None = None
    eta: np.ndarray | None = None
