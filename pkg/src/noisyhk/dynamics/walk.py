"""Random-walk diagnostics of a synchronized noisy cluster.

Once all agents are within eps of each other they share one local average, so
the unclamped cluster moves as y_i(t + 1) = mean(y(0)) + S_t + xi_i(t + 1),
where S_t is the partial sum of the per-step mean noise eta_k. S_t is a
centered random walk with variance t * Var(xi) / n; it changes sign
infinitely often, which is why clamped agents keep hitting both boundaries.
"""

import math

import numpy as np
from loguru import logger

from noisyhk.config import ExplicitInitial, SimulationConfig, UniformRandomInitial
from noisyhk.dynamics.core import initial_state, local_averages, run_trajectory
from noisyhk.dynamics.noise import NoiseModel
from noisyhk.dynamics.streams import NoiseBlocks, ReplicateStreams, replicate_streams
from noisyhk.errors import DegenerateNoiseError
from noisyhk.models import (
    BoundaryHitLog,
    CouplingReport,
    UnclampedRun,
    WalkRecord,
    confidence_limit,
)


def analytic_walk_variance(model: NoiseModel, n: int, t: int) -> float:
    """Return Var(S_t) = t * Var(xi) / n."""
    if n < 1 or t < 0:
        raise ValueError(f"need n >= 1 and t >= 0, got n={n}, t={t}")
    return t * model.variance / n


def walk_variance_bounds(model: NoiseModel, n: int, t: int) -> tuple[float, float]:
    """Return (t * c / n, t * d^2 / n) bracketing s_t^2.

    c is the noise variance and d the support bound.

    Raises:
        DegenerateNoiseError: If the noise variance is 0
    """
    if model.variance <= 0.0:
        raise DegenerateNoiseError(f"{model.kind} noise has zero variance")
    if n < 1 or t < 0:
        raise ValueError(f"need n >= 1 and t >= 0, got n={n}, t={t}")
    return t * model.variance / n, t * model.support_bound**2 / n


def walk_from_eta(
    eta: np.ndarray, model: NoiseModel, n: int, y0_mean: float = 0.0
) -> WalkRecord:
    """Build the walk S and its analytic variance from per-step mean noise."""
    eta = np.asarray(eta, dtype=np.float64)
    steps = np.arange(eta.size + 1)
    return WalkRecord(
        n=n,
        variance=model.variance,
        y0_mean=y0_mean,
        eta=eta,
        S=np.concatenate(([0.0], np.cumsum(eta))),
        s2=steps * model.variance / n,
    )


def lil_statistic(record: WalkRecord, t: int) -> float:
    """Return S_t / (s_t * sqrt(log log s_t)).

    Raises:
        ValueError: If log log s_t <= 0 (s_t <= e) or t is out of range
    """
    if not 0 <= t <= record.horizon:
        raise ValueError(f"t={t} outside 0..{record.horizon}")
    s = math.sqrt(record.s2[t])
    if s <= math.e:
        raise ValueError(f"log log s_t is undefined or non-positive at t={t} (s_t={s:.4g})")
    return float(record.S[t] / (s * math.sqrt(math.log(math.log(s)))))


def lil_series(record: WalkRecord) -> np.ndarray:
    """lil_statistic for every t, NaN where it is undefined."""
    s = np.sqrt(record.s2)
    out = np.full(s.size, np.nan)
    valid = s > math.e
    out[valid] = record.S[valid] / (s[valid] * np.sqrt(np.log(np.log(s[valid]))))
    return out


def sign_changes(S: np.ndarray) -> int:
    """Count sign changes of a walk, skipping exact zeros."""
    signs = np.sign(np.asarray(S))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def run_unclamped(
    config: SimulationConfig,
    streams: ReplicateStreams | None = None,
    *,
    horizon: int | None = None,
    record_states: bool = False,
) -> UnclampedRun:
    """Run the noisy HK dynamics without clamping.

    While the cluster stays synchronized the closed form
    y_i(t + 1) = mean(y(0)) + S_t + xi_i(t + 1) is checked at every step;
    the largest absolute deviation is reported as closed_form_residual.

    Args:
        config: Simulation configuration
        streams: Replicate streams (replicate 0 of config.master_seed if None)
        horizon: Override of config.horizon
        record_states: Keep the (horizon + 1, n) state array

    Returns:
        UnclampedRun with the walk record
    """
    streams = streams or replicate_streams(config.master_seed)
    steps = config.horizon if horizon is None else horizon
    if steps < 0:
        raise ValueError(f"horizon must be >= 0, got {steps}")
    n, eps = config.n, config.epsilon

    y = initial_state(config, streams).values
    initial_mean = float(y.mean())
    noise = NoiseBlocks(config.noise, n, streams.noise)
    eta = np.empty(steps)
    diameters = np.empty(steps + 1)
    states = np.empty((steps + 1, n)) if record_states else None
    partial_sum = 0.0
    residual = 0.0
    synchronized_until = -1

    for t in range(steps + 1):
        diam = float(y.max() - y.min())
        diameters[t] = diam
        if states is not None:
            states[t] = y
        if synchronized_until == t - 1 and diam <= confidence_limit(eps):
            synchronized_until = t
        if t == steps:
            break
        xi = noise.next()
        y_next = local_averages(y, eps, diam) + xi
        if synchronized_until == t:
            closed_form = initial_mean + partial_sum + xi
            residual = max(residual, float(np.abs(y_next - closed_form).max()))
        eta[t] = xi.mean()
        partial_sum += eta[t]
        y = y_next

    if synchronized_until < steps:
        logger.info(f"Unclamped run left synchronization after t={synchronized_until}")
    return UnclampedRun(
        walk=walk_from_eta(eta, config.noise, n, initial_mean),
        diameters=diameters,
        synchronized_until=synchronized_until,
        closed_form_residual=residual,
        states=states,
    )


def _require_consensus_start(config: SimulationConfig) -> None:
    initial = config.initial
    if isinstance(initial, UniformRandomInitial) and config.n > 1:
        raise ValueError("boundary diagnostics need a consensus start; got random initials")
    if isinstance(initial, ExplicitInitial):
        spread = max(initial.values) - min(initial.values)
        if spread > confidence_limit(config.epsilon):
            raise ValueError(f"initial diameter {spread:g} exceeds eps={config.epsilon:g}")


def boundary_recurrence(
    config: SimulationConfig,
    streams: ReplicateStreams | None = None,
    *,
    horizon: int | None = None,
) -> BoundaryHitLog:
    """Run the clamped dynamics from a consensus start and log clamp events.

    Raises:
        ValueError: If the configured initial state is not in consensus
    """
    _require_consensus_start(config)
    traj = run_trajectory(config, streams, horizon=horizon, record_states=False)
    hits = traj.boundary_hits
    logger.info(
        f"Boundary recurrence over {traj.horizon} steps: {hits.total} clamp events, "
        f"every agent hit both boundaries: {hits.hits_both()}"
    )
    return hits


def coupled_comparison(
    config: SimulationConfig,
    streams: ReplicateStreams | None = None,
    *,
    horizon: int | None = None,
) -> CouplingReport:
    """Compare the clamped run x with the unclamped run y under shared noise.

    Until the upper clamp first fires, y_i(t) <= x_i(t) must hold for every
    agent; max_excess is the largest y_i - x_i seen over those steps.
    """
    _require_consensus_start(config)
    streams = streams or replicate_streams(config.master_seed)
    steps = config.horizon if horizon is None else horizon
    n, eps = config.n, config.epsilon

    x = initial_state(config, streams).values
    y = x.copy()
    noise = NoiseBlocks(config.noise, n, streams.noise)
    max_excess = 0.0
    lower_steps = 0
    upper_at: int | None = None
    compared = 0

    for t in range(1, steps + 1):
        xi = noise.next()
        pre_x = local_averages(x, eps) + xi
        if np.any(pre_x > 1.0):
            upper_at = t
            break
        if np.any(pre_x < 0.0):
            lower_steps += 1
        x = np.clip(pre_x, 0.0, 1.0)
        y = local_averages(y, eps) + xi
        max_excess = max(max_excess, float((y - x).max()))
        compared = t

    return CouplingReport(
        steps_compared=compared,
        upper_clamp_at=upper_at,
        lower_clamp_steps=lower_steps,
        max_excess=max_excess,
    )
