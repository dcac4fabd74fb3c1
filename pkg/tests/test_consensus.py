"""Tests for diameter, clusters and quasi-consensus detection."""

import numpy as np
import pytest
from noisyhk.config import SimulationConfig
from noisyhk.dynamics.core import trajectory_from_states
from noisyhk.dynamics.noise import UniformNoise, ZeroNoise
from noisyhk.errors import AbsorptionViolationError
from noisyhk.metrics.consensus import (
    clusters,
    count_clusters,
    detect_quasi_consensus,
    diameter,
    divergence_detected,
    exit_after_entry,
    first_entry_time,
    stationary_since,
)
from noisyhk.models import OpinionState, confidence_limit

CERTIFIED = UniformNoise(delta=0.05)


def _traj(diameters: list[float], noise=None, eps: float = 0.2):
    """Two-agent trajectory whose diameters follow the given list."""
    states = np.array([[0.0, d] for d in diameters])
    return trajectory_from_states(states, eps, noise)


def test_diameter_of_state():
    """Test max - min for a state and for a raw vector."""
    assert diameter(OpinionState(values=[0.2, 0.9, 0.5])) == pytest.approx(0.7)
    assert diameter(np.array([0.4])) == 0.0


def test_diameter_is_permutation_and_shift_invariant():
    """Test invariance under permutation and valid translation."""
    rng = np.random.default_rng(0)
    values = rng.uniform(0.1, 0.6, 20)
    base = diameter(values)
    assert diameter(rng.permutation(values)) == base
    assert diameter(values + 0.3) == pytest.approx(base, abs=1e-15)


def test_clusters_chain_rule():
    """Test that clusters chain gaps of at most eps, not diameters."""
    partition = clusters(OpinionState(values=[0.0, 0.15, 0.3, 0.9]), 0.2)
    assert partition.count == 2
    assert partition.groups[0].members == [0, 1, 2]
    assert partition.groups[0].mean == pytest.approx(0.15)
    assert partition.groups[1].members == [3]


def test_clusters_of_equal_values_and_small_diameter():
    """Test the single-cluster cases."""
    assert clusters(np.array([0.4, 0.4, 0.4]), 0.01).count == 1
    assert clusters(np.array([0.1, 0.25, 0.2]), 0.2).count == 1


def test_clusters_permutation_invariant():
    """Test that a permutation only relabels cluster members."""
    rng = np.random.default_rng(1)
    values = rng.random(30)
    perm = rng.permutation(30)
    original = clusters(values, 0.05)
    permuted = clusters(values[perm], 0.05)
    assert original.count == permuted.count == count_clusters(values, 0.05)
    for a, b in zip(original.groups, permuted.groups, strict=True):
        assert sorted(values[a.members]) == sorted(values[perm][b.members])


def test_certified_quasi_consensus_from_start():
    """Test that d_V(0) <= eps under certified noise gives T=0."""
    verdict = detect_quasi_consensus(_traj([0.1, 0.05, 0.15], CERTIFIED), 0.2, window=1000)
    assert verdict.reached
    assert verdict.T == 0
    assert verdict.certified


def test_certified_quasi_consensus_uses_first_entry():
    """Test that certified noise uses the first hitting time regardless of window."""
    verdict = detect_quasi_consensus(_traj([0.5, 0.3, 0.2, 0.1], CERTIFIED), 0.2, window=1000)
    assert verdict.reached
    assert verdict.T == 2


def test_certified_exit_raises_absorption_violation():
    """Test that leaving [0, eps] under certified noise is a hard error."""
    with pytest.raises(AbsorptionViolationError):
        detect_quasi_consensus(_traj([0.1, 0.3], CERTIFIED), 0.2)


def test_fragmented_zero_noise_is_not_detected():
    """Test that a diameter staying above eps yields NotDetected."""
    verdict = detect_quasi_consensus(_traj([0.8] * 50, ZeroNoise()), 0.2, window=10)
    assert not verdict.reached
    assert verdict.T is None


def test_uncertified_window_rule():
    """Test that the trailing run must span the window."""
    diameters = [0.5, 0.1, 0.5] + [0.1] * 20
    traj = _traj(diameters, UniformNoise(delta=0.3))
    verdict = detect_quasi_consensus(traj, 0.2, window=10)
    assert verdict.reached
    assert verdict.T == 3
    assert not verdict.certified
    assert not detect_quasi_consensus(traj, 0.2, window=21).reached


def test_divergence_detection():
    """Test the first strict exceedance of eps."""
    assert divergence_detected(_traj([0.1, 0.1, 0.1]), 0.2) is None
    assert divergence_detected(_traj([0.1, 0.2, 0.25]), 0.2) == 2
    assert divergence_detected(trajectory_from_states(np.array([[0.0, 1.0]]), 0.5), 0.5) == 0


def test_entry_and_exit_times():
    """Test first entry and the first exit after it."""
    traj = _traj([0.5, 0.1, 0.1, 0.3, 0.1])
    assert first_entry_time(traj, 0.2) == 1
    assert exit_after_entry(traj, 0.2) == 3
    assert first_entry_time(_traj([0.5, 0.5]), 0.2) is None
    assert exit_after_entry(_traj([0.5, 0.5]), 0.2) is None


def test_verdict_and_divergence_consistent_when_window_covers_horizon():
    """Test that quasi-consensus with window == horizon excludes divergence."""
    traj = _traj([0.1] * 11, UniformNoise(delta=0.3))
    verdict = detect_quasi_consensus(traj, 0.2, window=traj.horizon)
    assert verdict.reached
    assert divergence_detected(traj, 0.2) is None


def test_stationary_since():
    """Test the first step after which states never change."""
    states = np.array([[0.1, 0.3], [0.2, 0.2], [0.2, 0.2], [0.2, 0.2]])
    assert stationary_since(trajectory_from_states(states, 0.2)) == 1


def test_rounded_spread_at_eps_counts_as_within():
    """Test that a stored spread of eps plus rounding stays one cluster."""
    eps = 0.01
    values = np.full(10, 0.5) + np.array([0.005, -0.005] * 5)
    assert diameter(values) <= confidence_limit(eps)
    assert count_clusters(values, eps) == clusters(values, eps).count == 1

    traj = trajectory_from_states(np.stack([np.full(10, 0.5), values, values]), eps)
    assert first_entry_time(traj, eps) == 0
    assert exit_after_entry(traj, eps) is None
    assert divergence_detected(traj, eps) is None


def test_confidence_limit_only_absorbs_rounding():
    """Test that a real gap just above eps still separates clusters."""
    assert count_clusters(np.array([0.5, 0.5101]), 0.01) == 2
    assert confidence_limit(0.01) - 0.01 < 1e-14


def test_default_window_matches_config_default():
    """Test that detection defaults to the configured window."""
    traj = _traj([0.5] + [0.1] * 20, UniformNoise(delta=0.15))
    default = SimulationConfig(n=2, epsilon=0.2).detection_window
    assert detect_quasi_consensus(traj, 0.2).window == default
