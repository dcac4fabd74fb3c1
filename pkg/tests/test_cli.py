"""Tests for the command-line interface.

Tests verify exit codes, emitted files, byte-for-byte reproducibility and
manifest replay.
"""

import json
import sys
from pathlib import Path

import pandas as pd
import pytest
import typer
from noisyhk import __version__
from noisyhk.cli import USAGE_ERRORS, app, main
from typer.testing import CliRunner

runner = CliRunner()


def _write_config(tmp_path: Path, **fields) -> Path:
    data = {
        "n": 5,
        "epsilon": 0.2,
        "noise": {"kind": "uniform", "delta": 0.02},
        "horizon": 10,
        "master_seed": 3,
        "replicates": 3,
        **fields,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


def test_run_writes_trajectory_and_manifest(tmp_path: Path):
    """Test that run writes horizon + 1 rows and a manifest."""
    out = tmp_path / "out"
    result = runner.invoke(app, ["run", str(_write_config(tmp_path)), "--out-dir", str(out)])

    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out / "trajectory.csv")
    assert len(frame) == 11
    assert list(frame.columns) == ["t", "d_V", "n_clusters", "min", "max"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "run"
    assert manifest["master_seed"] == 3
    assert {o["name"] for o in manifest["outputs"]} == {
        "trajectory.csv",
        "boundary_events.csv",
        "summary.json",
    }


def test_run_overrides_and_record_states(tmp_path: Path):
    """Test --horizon, --seed and the per-agent columns."""
    out = tmp_path / "out"
    args = ["run", str(_write_config(tmp_path)), "--out-dir", str(out)]
    result = runner.invoke(app, [*args, "--horizon", "4", "--seed", "9", "--record-states"])

    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out / "trajectory.csv")
    assert len(frame) == 5
    assert list(frame.columns)[5:] == [f"x_{i}" for i in range(5)]
    assert json.loads((out / "manifest.json").read_text())["master_seed"] == 9


def test_run_is_byte_reproducible(tmp_path: Path):
    """Test that the same config and seed give identical files."""
    config = str(_write_config(tmp_path, horizon=200))
    for name in ("a", "b"):
        result = runner.invoke(app, ["run", config, "--out-dir", str(tmp_path / name)])
        assert result.exit_code == 0, result.output
    for name in ("trajectory.csv", "boundary_events.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_malformed_config_exits_one_without_output(tmp_path: Path):
    """Test that an invalid config exits 1 and writes nothing."""
    out = tmp_path / "out"
    config = _write_config(tmp_path, epsilon=2.0)
    result = runner.invoke(app, ["run", str(config), "--out-dir", str(out)])

    assert result.exit_code == 1
    assert not out.exists()


def test_missing_config_exits_one(tmp_path: Path):
    """Test that a missing config file is a usage error."""
    result = runner.invoke(app, ["run", str(tmp_path / "nope.json")])
    assert result.exit_code == 1


def test_sweep_writes_one_row_per_ratio(tmp_path: Path):
    """Test the sweep table and its reproducibility."""
    config = str(_write_config(tmp_path, horizon=50))
    ratios = "0,0.25,0.5,0.75,1.0"
    for name in ("a", "b"):
        args = ["sweep", config, "--ratios", ratios, "--replicates", "3", "--jobs", "1"]
        result = runner.invoke(app, [*args, "--out-dir", str(tmp_path / name)])
        assert result.exit_code == 0, result.output

    frame = pd.read_csv(tmp_path / "a" / "sweep.csv")
    assert frame["ratio"].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert (frame["replicates"] == 3).all()
    first, second = (tmp_path / d / "sweep.csv" for d in ("a", "b"))
    assert first.read_bytes() == second.read_bytes()


def test_sweep_rejects_bad_ratios(tmp_path: Path):
    """Test that unparsable or negative ratios are usage errors."""
    config = str(_write_config(tmp_path))
    assert runner.invoke(app, ["sweep", config, "--ratios", "a,b"]).exit_code == 1
    assert runner.invoke(app, ["sweep", config, "--ratios", "0.5,-1"]).exit_code == 1


def test_walk_with_zero_noise_is_flat(tmp_path: Path):
    """Test that zero noise gives S = 0, no boundary events and the initial mean."""
    out = tmp_path / "out"
    config = _write_config(
        tmp_path,
        noise={"kind": "zero"},
        initial={"kind": "all_equal", "value": 0.5},
        horizon=100,
    )
    result = runner.invoke(app, ["walk", str(config), "--out-dir", str(out)])

    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out / "walk.csv")
    assert len(frame) == 101
    assert (frame["S"] == 0.0).all()
    assert pd.read_csv(out / "boundary_events.csv").empty
    assert json.loads((out / "summary.json").read_text())["initial_mean"] == 0.5


def test_walk_check_identity(tmp_path: Path):
    """Test that the closed-form residual is reported for a synchronized start."""
    out = tmp_path / "out"
    config = _write_config(
        tmp_path, initial={"kind": "all_equal", "value": 0.5}, horizon=500
    )
    args = ["walk", str(config), "--out-dir", str(out), "--check-identity"]
    result = runner.invoke(app, args)

    assert result.exit_code == 0, result.output
    summary = json.loads((out / "summary.json").read_text())
    assert summary["closed_form_residual"] <= 1e-12
    assert summary["synchronized_until"] == 500


def test_reproduce_unknown_scenario_exits_one(tmp_path: Path):
    """Test that an unknown scenario name is a usage error."""
    out = tmp_path / "out"
    result = runner.invoke(app, ["reproduce", "fig7", "--out-dir", str(out)])
    assert result.exit_code == 1
    assert not out.exists()


def test_reproduce_fig2_reports_quasi_consensus(tmp_path: Path):
    """Test that the noisy merging scenario ends in quasi-consensus."""
    out = tmp_path / "fig2"
    result = runner.invoke(app, ["reproduce", "fig2", "--out-dir", str(out)])

    assert result.exit_code == 0, result.output
    assert "verdict=quasi_consensus" in result.stdout
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"]["status"] == "quasi_consensus"
    assert summary["verdict"]["T"] is not None


def test_certify_prints_both_certificates(tmp_path: Path):
    """Test the certificate report of a sub-critical config."""
    result = runner.invoke(app, ["certify", str(_write_config(tmp_path))])

    assert result.exit_code == 0, result.output
    assert "Theorem2Certificate" in result.stdout
    assert "CertificateRefusal" in result.stdout


def test_replay_verifies_run(tmp_path: Path):
    """Test that replaying a manifest reproduces every output hash."""
    out = tmp_path / "out"
    runner.invoke(app, ["run", str(_write_config(tmp_path, horizon=100)), "--out-dir", str(out)])
    args = ["replay", str(out / "manifest.json"), "--out-dir", str(tmp_path / "replay")]
    result = runner.invoke(app, args)

    assert result.exit_code == 0, result.output
    assert "Replay verified 3 files" in result.stdout


def test_replay_wall_clock_seed(tmp_path: Path):
    """Test that a clock-seeded run records its seed and replays exactly."""
    out = tmp_path / "out"
    args = ["run", str(_write_config(tmp_path)), "--out-dir", str(out), "--wall-clock-seed"]
    assert runner.invoke(app, args).exit_code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["master_seed"] == manifest["master_seed"]

    args = ["replay", str(out / "manifest.json"), "--out-dir", str(tmp_path / "replay")]
    assert runner.invoke(app, args).exit_code == 0


def test_replay_detects_tampered_output(tmp_path: Path):
    """Test that a changed hash makes replay exit 2."""
    out = tmp_path / "out"
    runner.invoke(app, ["run", str(_write_config(tmp_path)), "--out-dir", str(out)])
    manifest_path = out / "manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["outputs"][0]["sha256"] = "0" * 64
    manifest_path.write_text(json.dumps(manifest))

    args = ["replay", str(manifest_path), "--out-dir", str(tmp_path / "replay")]
    assert runner.invoke(app, args).exit_code == 2


def test_replay_missing_manifest_exits_one(tmp_path: Path):
    """Test that a missing manifest is a usage error."""
    assert runner.invoke(app, ["replay", str(tmp_path / "manifest.json")]).exit_code == 1


def test_version_option():
    """Test --version."""
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


@pytest.mark.parametrize(
    ("argv", "code"),
    [
        (["noisyhk", "--version"], 0),
        (["noisyhk", "run"], 1),
        (["noisyhk", "run", "missing.json"], 1),
    ],
)
def test_main_exit_codes(monkeypatch, argv, code):
    """Test the console entry point's exit codes."""
    monkeypatch.setattr(sys, "argv", argv)
    with pytest.raises(SystemExit) as exc_info:
        main()
    assert exc_info.value.code == code


def test_usage_errors_include_typer_click_classes():
    """Test that the entry point catches the usage errors typer itself raises."""
    assert issubclass(typer.BadParameter, USAGE_ERRORS)
