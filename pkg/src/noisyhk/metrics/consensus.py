"""Diameter, cluster and quasi-consensus metrics."""

import numpy as np
from loguru import logger

from noisyhk.config import DEFAULT_DETECTION_WINDOW
from noisyhk.dynamics.noise import is_subcritical
from noisyhk.errors import AbsorptionViolationError
from noisyhk.models import (
    Cluster,
    ClusterPartition,
    ConsensusVerdict,
    OpinionState,
    Trajectory,
    check_epsilon,
    confidence_limit,
)


def _values(state: OpinionState | np.ndarray) -> np.ndarray:
    return state.values if isinstance(state, OpinionState) else np.asarray(state)


def diameter(state: OpinionState | np.ndarray) -> float:
    """Return max_i x_i - min_i x_i."""
    values = _values(state)
    return float(values.max() - values.min())


def count_clusters(values: np.ndarray, eps: float) -> int:
    """Count gap-chained clusters without building the partition."""
    limit = confidence_limit(eps)
    if values.max() - values.min() <= limit:
        return 1
    return 1 + int(np.count_nonzero(np.diff(np.sort(values)) > limit))


def clusters(state: OpinionState | np.ndarray, eps: float) -> ClusterPartition:
    """Partition agents into clusters by chaining sorted gaps of at most eps.

    Args:
        state: Opinion vector
        eps: Confidence threshold

    Returns:
        ClusterPartition with groups ordered by value, members ascending
    """
    eps = check_epsilon(eps)
    values = _values(state)
    order = np.argsort(values, kind="stable")
    cuts = np.flatnonzero(np.diff(values[order]) > confidence_limit(eps)) + 1
    groups = []
    for block in np.split(order, cuts):
        members = sorted(block.tolist())
        groups.append(Cluster(members=members, mean=float(values[members].mean())))
    return ClusterPartition(epsilon=eps, groups=groups)


def first_entry_time(traj: Trajectory, eps: float) -> int | None:
    """Return the first t with d_V(t) <= eps, or None."""
    hits = np.flatnonzero(traj.diameters <= confidence_limit(eps))
    return int(hits[0]) if hits.size else None


def exit_after_entry(traj: Trajectory, eps: float) -> int | None:
    """Return the first t after the first entry with d_V(t) > eps, or None."""
    entry = first_entry_time(traj, eps)
    if entry is None:
        return None
    exits = np.flatnonzero(traj.diameters[entry:] > confidence_limit(eps))
    return entry + int(exits[0]) if exits.size else None


def divergence_detected(traj: Trajectory, eps: float) -> int | None:
    """Return the first t with d_V(t) > eps, or None."""
    hits = np.flatnonzero(traj.diameters > confidence_limit(eps))
    return int(hits[0]) if hits.size else None


def detect_quasi_consensus(
    traj: Trajectory, eps: float, window: int = DEFAULT_DETECTION_WINDOW
) -> ConsensusVerdict:
    """Decide whether the trajectory reaches quasi-consensus.

    For noise carrying a sub-critical certificate the set {d_V <= eps} is
    absorbing, so T is the first hitting time. Otherwise T is the start of the
    final run of steps with d_V <= eps, accepted only when that run spans at
    least `window` steps before the horizon.

    Args:
        traj: Trajectory to inspect
        eps: Confidence threshold
        window: Trailing steps required without a certificate

    Returns:
        ConsensusVerdict

    Raises:
        AbsorptionViolationError: If a certified trajectory leaves {d_V <= eps}
    """
    eps = check_epsilon(eps)
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")

    if is_subcritical(traj.noise_model, eps):
        entry = first_entry_time(traj, eps)
        if entry is None:
            return ConsensusVerdict(status="not_detected", window=window, certified=True)
        escape = exit_after_entry(traj, eps)
        if escape is not None:
            raise AbsorptionViolationError(
                f"d_V={traj.diameters[escape]:.6g} > eps={eps:g} at t={escape} "
                f"after entering quasi-consensus at t={entry}"
            )
        return ConsensusVerdict(status="quasi_consensus", T=entry, window=window, certified=True)

    above = np.flatnonzero(traj.diameters > confidence_limit(eps))
    T = 0 if above.size == 0 else int(above[-1]) + 1
    if T > traj.horizon or traj.horizon - T < window:
        logger.debug(f"No quasi-consensus: final run starts at t={T}, window={window}")
        return ConsensusVerdict(status="not_detected", window=window)
    return ConsensusVerdict(status="quasi_consensus", T=T, window=window)


def stationary_since(traj: Trajectory) -> int | None:
    """Return the first t from which the recorded state never changes.

    Returns None when states were not recorded.
    """
    if traj.states is None:
        return None
    changed = np.flatnonzero(np.any(traj.states[1:] != traj.states[:-1], axis=1))
    return 0 if changed.size == 0 else int(changed[-1]) + 1
