"""Tests for core data models."""

import numpy as np
import pytest
from noisyhk.models import (
    BoundaryHitLog,
    ConsensusVerdict,
    OpinionState,
    PreClampState,
    check_epsilon,
)
from pydantic import ValidationError


def test_opinion_state_model_creation():
    """Test that OpinionState stores a read-only float vector."""
    state = OpinionState(values=[0.0, 0.5, 1.0], t=3)

    assert state.n == 3
    assert state.t == 3
    assert state.values.dtype == np.float64
    with pytest.raises(ValueError):
        state.values[0] = 0.2


@pytest.mark.parametrize(
    "values",
    [[0.5, 1.01], [-0.1], [], [[0.1, 0.2]], [0.1, float("nan")]],
)
def test_opinion_state_rejects_invalid_vectors(values):
    """Test that values outside [0, 1], empty, nested or NaN vectors fail."""
    with pytest.raises(ValidationError):
        OpinionState(values=values)


def test_opinion_state_rejects_negative_time():
    """Test that t must be non-negative."""
    with pytest.raises(ValidationError):
        OpinionState(values=[0.5], t=-1)


def test_pre_clamp_state_reports_hits():
    """Test that pre-clamp values may leave [0, 1] and report clamp targets."""
    pre = PreClampState(values=[-0.01, 0.5, 1.2, 1.0, 0.0])
    assert pre.lower_hits.tolist() == [0]
    assert pre.upper_hits.tolist() == [2]


@pytest.mark.parametrize("eps", [0.0, -0.2, 1.0001])
def test_check_epsilon_rejects_out_of_range(eps):
    """Test that eps must lie in (0, 1]."""
    with pytest.raises(ValueError):
        check_epsilon(eps)


def test_check_epsilon_accepts_one():
    """Test the closed upper end of the eps range."""
    assert check_epsilon(1) == 1.0


def test_boundary_hit_log_records_events():
    """Test recording, totals and both-boundary detection."""
    hits = BoundaryHitLog.empty(2)
    assert hits.n == 2
    assert hits.total == 0
    assert not hits.hits_both()

    hits.record(3, np.array([0, 1]), np.array([], dtype=int))
    hits.record(9, np.array([], dtype=int), np.array([0]))
    assert hits.total == 3
    assert hits.lower == [[3], [3]]
    assert not hits.hits_both()

    hits.record(12, np.array([], dtype=int), np.array([1]))
    assert hits.hits_both()
    assert hits.events()[-1] == (12, 1, "upper")


def test_consensus_verdict_reached():
    """Test the reached shortcut."""
    assert ConsensusVerdict(status="quasi_consensus", T=0, window=10).reached
    assert not ConsensusVerdict(status="not_detected", window=10).reached
    with pytest.raises(ValidationError):
        ConsensusVerdict(status="maybe", window=10)
