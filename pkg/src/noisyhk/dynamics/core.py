"""Noise-free and noisy Hegselmann-Krause updates.

Local averages are row sums of the masked opinion matrix (numpy pairwise
summation), so agents with the same neighbor set get bit-identical averages.
A neighbor set whose values are all equal averages to that value exactly,
which keeps noise-free fixed points exact.
"""

import numpy as np
from loguru import logger

from noisyhk.config import SimulationConfig
from noisyhk.dynamics.noise import NoiseModel, ZeroNoise
from noisyhk.dynamics.streams import NoiseBlocks, ReplicateStreams, replicate_streams
from noisyhk.metrics.consensus import count_clusters
from noisyhk.models import (
    BoundaryHitLog,
    OpinionState,
    PreClampState,
    Trajectory,
    check_epsilon,
    confidence_limit,
)

STATE_WARN_CELLS = 50_000_000


def neighbor_mask(values: np.ndarray, eps: float) -> np.ndarray:
    """Return the n x n confidence mask |x_j - x_i| <= eps."""
    return np.abs(values[:, None] - values[None, :]) <= confidence_limit(eps)


def _masked_averages(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    rows = np.broadcast_to(values, mask.shape)
    sums = np.where(mask, rows, 0.0).sum(axis=1)
    lo = np.where(mask, rows, np.inf).min(axis=1)
    hi = np.where(mask, rows, -np.inf).max(axis=1)
    return np.where(lo == hi, lo, sums / mask.sum(axis=1))


def _global_average(values: np.ndarray) -> float:
    lo, hi = values.min(), values.max()
    if lo == hi:
        return float(lo)
    return float(values[None, :].sum(axis=1)[0] / values.size)


def local_averages(values: np.ndarray, eps: float, diam: float | None = None) -> np.ndarray:
    """Return every agent's neighbor average.

    When the diameter is at most eps every neighbor set is the whole
    population and the n x n mask is skipped.
    """
    if diam is None:
        diam = float(values.max() - values.min())
    if diam <= confidence_limit(eps):
        return np.full(values.size, _global_average(values))
    return _masked_averages(values, neighbor_mask(values, eps))


def _check_agent(state: OpinionState, i: int) -> None:
    if not 0 <= i < state.n:
        raise IndexError(f"agent index {i} out of range for n={state.n}")


def neighbor_set(state: OpinionState, i: int, eps: float) -> set[int]:
    """Return {j : |x_j - x_i| <= eps}, which always contains i."""
    eps = check_epsilon(eps)
    _check_agent(state, i)
    row = np.abs(state.values - state.values[i]) <= confidence_limit(eps)
    return set(np.flatnonzero(row).tolist())


def local_average(state: OpinionState, i: int, eps: float) -> float:
    """Return the mean opinion over agent i's neighbor set."""
    eps = check_epsilon(eps)
    _check_agent(state, i)
    return float(local_averages(state.values, eps)[i])


def clamp(v: float) -> float:
    """Project v onto [0, 1]."""
    return min(1.0, max(0.0, v))


def _check_noise(state: OpinionState, noise: np.ndarray) -> np.ndarray:
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != (state.n,):
        raise ValueError(f"noise vector has shape {noise.shape}, expected ({state.n},)")
    return noise


def pre_clamp(state: OpinionState, noise: np.ndarray, eps: float) -> PreClampState:
    """Return local averages plus noise, before clamping."""
    eps = check_epsilon(eps)
    noise = _check_noise(state, noise)
    return PreClampState(values=local_averages(state.values, eps) + noise, t=state.t + 1)


def step(state: OpinionState, noise: np.ndarray, eps: float) -> OpinionState:
    """Advance one synchronous noisy HK step.

    Args:
        state: Opinions at step t
        noise: One noise value per agent
        eps: Confidence threshold

    Returns:
        Opinions at step t + 1, clamped to [0, 1]

    Raises:
        ValueError: If noise has the wrong length or eps is outside (0, 1]
    """
    pre = pre_clamp(state, noise, eps)
    return OpinionState(values=np.clip(pre.values, 0.0, 1.0), t=pre.t)


def initial_state(config: SimulationConfig, streams: ReplicateStreams) -> OpinionState:
    """Draw the initial opinions from the replicate's initial stream."""
    return OpinionState(values=config.initial.generate(config.n, streams.initial))


def run_trajectory(
    config: SimulationConfig,
    streams: ReplicateStreams | None = None,
    *,
    horizon: int | None = None,
    record_states: bool | None = None,
    record_noise: bool = False,
    record_eta: bool = False,
) -> Trajectory:
    """Simulate steps 1..horizon and collect per-step diagnostics.

    Args:
        config: Simulation configuration
        streams: Replicate streams (replicate 0 of config.master_seed if None)
        horizon: Override of config.horizon; 0 yields the initial state only
        record_states: Override of config.record_states
        record_noise: Keep the full noise matrix
        record_eta: Keep the per-step mean noise

    Returns:
        Trajectory over steps 0..horizon
    """
    streams = streams or replicate_streams(config.master_seed)
    steps = config.horizon if horizon is None else horizon
    if steps < 0:
        raise ValueError(f"horizon must be >= 0, got {steps}")
    keep_states = config.record_states if record_states is None else record_states
    n, eps = config.n, config.epsilon
    if keep_states and (steps + 1) * n > STATE_WARN_CELLS:
        logger.warning(f"Recording {(steps + 1) * n} state values; consider record_states=False")

    x = initial_state(config, streams).values
    noise = NoiseBlocks(config.noise, n, streams.noise)
    hits = BoundaryHitLog.empty(n)
    diameters = np.empty(steps + 1)
    n_clusters = np.empty(steps + 1, dtype=np.int64)
    minima = np.empty(steps + 1)
    maxima = np.empty(steps + 1)
    states = np.empty((steps + 1, n)) if keep_states else None
    draws = np.empty((steps, n)) if record_noise else None
    eta = np.empty(steps) if record_eta else None

    initial = x.copy()
    for t in range(steps + 1):
        lo, hi = x.min(), x.max()
        diam = hi - lo
        minima[t], maxima[t], diameters[t] = lo, hi, diam
        n_clusters[t] = count_clusters(x, eps)
        if states is not None:
            states[t] = x
        if t == steps:
            break

        xi = noise.next()
        if draws is not None:
            draws[t] = xi
        if eta is not None:
            eta[t] = xi.mean()
        pre = local_averages(x, eps, diam) + xi
        low, high = pre < 0.0, pre > 1.0
        if low.any() or high.any():
            hits.record(t + 1, np.flatnonzero(low), np.flatnonzero(high))
        x = np.clip(pre, 0.0, 1.0)

    logger.debug(
        f"Trajectory n={n} eps={eps:g} horizon={steps} replicate={streams.replicate}: "
        f"final d_V={diameters[-1]:.4g}, clusters={n_clusters[-1]}, clamp events={hits.total}"
    )
    return Trajectory(
        n=n,
        epsilon=eps,
        horizon=steps,
        noise_model=config.noise,
        diameters=diameters,
        n_clusters=n_clusters,
        minima=minima,
        maxima=maxima,
        initial=initial,
        final=x.copy(),
        boundary_hits=hits,
        states=states,
        noise_draws=draws,
        eta=eta,
    )


def trajectory_from_states(
    states: np.ndarray, eps: float, noise_model: NoiseModel | None = None
) -> Trajectory:
    """Build a Trajectory from an externally produced (horizon + 1, n) state array.

    Boundary hits are unknown and left empty.
    """
    eps = check_epsilon(eps)
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError(f"states must have shape (horizon + 1, n), got {states.shape}")
    minima, maxima = states.min(axis=1), states.max(axis=1)
    return Trajectory(
        n=states.shape[1],
        epsilon=eps,
        horizon=states.shape[0] - 1,
        noise_model=noise_model or ZeroNoise(),
        diameters=maxima - minima,
        n_clusters=np.array([count_clusters(row, eps) for row in states]),
        minima=minima,
        maxima=maxima,
        initial=states[0].copy(),
        final=states[-1].copy(),
        boundary_hits=BoundaryHitLog.empty(states.shape[1]),
        states=states,
    )


def consensus_phase_residual(traj: Trajectory) -> float:
    """Largest deviation from the synchronized update during consensus steps.

    At every recorded step t with d_V(t) <= eps, the general masked update must
    equal mean(x(t)) + xi(t + 1), and the recorded x(t + 1) must equal its
    clamp. Requires states and noise draws.
    """
    if traj.states is None or traj.noise_draws is None:
        raise ValueError("consensus_phase_residual needs recorded states and noise draws")
    residual = 0.0
    for t in np.flatnonzero(traj.diameters[:-1] <= confidence_limit(traj.epsilon)):
        x, xi = traj.states[t], traj.noise_draws[t]
        expected = x.mean() + xi
        general = _masked_averages(x, neighbor_mask(x, traj.epsilon)) + xi
        residual = max(
            residual,
            float(np.abs(general - expected).max()),
            float(np.abs(traj.states[t + 1] - np.clip(expected, 0.0, 1.0)).max()),
        )
    return residual
