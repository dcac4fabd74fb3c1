"""Opinion state models."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def check_epsilon(eps: float) -> float:
    """Validate a confidence threshold, which must lie in (0, 1]."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"confidence threshold must lie in (0, 1], got {eps}")
    return float(eps)


# Opinions lie in [0, 1]: opinion + noise sums round by less than one ulp of 1.0.
ROUNDING_SLACK = 4 * float(np.finfo(np.float64).eps)


def confidence_limit(eps: float) -> float:
    """Return the largest distance that counts as within eps.

    Every comparison against the confidence threshold (neighbors, clusters,
    quasi-consensus) uses this limit, so a synchronized cluster whose real
    spread is at most eps is never split by rounding of its stored values.
    """
    return eps + ROUNDING_SLACK


def _as_readonly_vector(values: object) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("opinion vector contains non-finite values")
    arr.setflags(write=False)
    return arr


class OpinionState(BaseModel):
    """Opinions of n agents at step t, every value in [0, 1]."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    t: int = Field(default=0, ge=0)

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: object) -> np.ndarray:
        arr = _as_readonly_vector(v)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("opinions must lie in [0, 1]")
        return arr

    @property
    def n(self) -> int:
        return int(self.values.size)


class PreClampState(BaseModel):
    """Local averages plus noise before clamping; values may leave [0, 1]."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    t: int = Field(default=0, ge=0)

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: object) -> np.ndarray:
        return _as_readonly_vector(v)

    @property
    def lower_hits(self) -> np.ndarray:
        """Agents the lower clamp will move."""
        return np.flatnonzero(self.values < 0.0)

    @property
    def upper_hits(self) -> np.ndarray:
        """Agents the upper clamp will move."""
        return np.flatnonzero(self.values > 1.0)
