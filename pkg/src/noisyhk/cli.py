"""Command-line interface: run, sweep, walk, reproduce, certify and replay.

Every data-producing command writes its files plus a manifest.json that
records the resolved configuration, the options and a SHA-256 per output, so
`noisyhk replay` can re-execute the command and verify the files bit-for-bit.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

import importlib
import sys
import tempfile
import time
from collections.abc import Callable
from datetime import datetime
from pathlib import Path
from typing import Annotated, Any

import click
import typer
from loguru import logger

from noisyhk import __version__
from noisyhk.config import Settings, SimulationConfig, load_config
from noisyhk.dynamics.core import run_trajectory
from noisyhk.dynamics.noise import certify_theorem2, certify_theorem3
from noisyhk.dynamics.streams import replicate_streams
from noisyhk.dynamics.walk import (
    run_unclamped,
    sign_changes,
    walk_from_eta,
    walk_variance_bounds,
)
from noisyhk.errors import ConfigError, NoisyHKError, ReplayMismatchError
from noisyhk.harness import SCENARIOS, reproduce_scenario, sweep_critical
from noisyhk.metrics.consensus import (
    clusters,
    detect_quasi_consensus,
    divergence_detected,
    exit_after_entry,
)
from noisyhk.metrics.graph import graph_summary, interaction_graph
from noisyhk.report import (
    MANIFEST_NAME,
    SUMMARY_NAME,
    boundary_events_frame,
    build_manifest,
    load_manifest,
    save_json,
    save_manifest,
    sweep_frame,
    trajectory_frame,
    walk_frame,
    write_csv,
)

EXIT_USAGE = 1
EXIT_RUNTIME = 2

# typer may ship its own copy of click; catch the classes it actually raises
_typer_click_exceptions = importlib.import_module(typer.BadParameter.__module__)
USAGE_ERRORS = (click.UsageError, _typer_click_exceptions.UsageError)
ABORTS = (click.Abort, typer.Abort)
LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}"

app = typer.Typer(
    name="noisyhk",
    help="Noisy Hegselmann-Krause opinion dynamics simulator.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigArg = Annotated[Path, typer.Argument(help="JSON simulation config")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="Override the master seed")]
HorizonOpt = Annotated[int | None, typer.Option("--horizon", help="Override the horizon")]
OutDirOpt = Annotated[Path | None, typer.Option("--out-dir", help="Output directory")]
WallClockOpt = Annotated[
    bool, typer.Option("--wall-clock-seed", help="Seed from the clock (recorded in the manifest)")
]


def _configure_logging(level: str) -> None:
    logger.remove()
    logger.add(lambda msg: sys.stderr.write(msg), level=level, format=LOG_FORMAT)


def _fail(message: str, code: int) -> typer.Exit:
    typer.echo(f"Error: {message}", err=True)
    return typer.Exit(code)


def _resolve_config(
    config_path: Path, seed: int | None, horizon: int | None, wall_clock_seed: bool
) -> SimulationConfig:
    if wall_clock_seed:
        seed = time.time_ns() % 2**63
        logger.warning(f"Using wall-clock seed {seed}")
    try:
        return load_config(config_path).with_overrides(master_seed=seed, horizon=horizon)
    except (FileNotFoundError, ConfigError) as exc:
        raise _fail(str(exc), EXIT_USAGE) from exc


def _out_dir(out_dir: Path | None, command: str) -> Path:
    return out_dir if out_dir is not None else Settings().out_dir / command


def _execute_run(config: SimulationConfig, options: dict[str, Any], out_dir: Path) -> list[Path]:
    streams = replicate_streams(config.master_seed, options.get("replicate", 0))
    traj = run_trajectory(
        config, streams, record_states=options.get("record_states", False) or config.record_states
    )
    eps = config.epsilon
    verdict = detect_quasi_consensus(traj, eps, config.detection_window)
    summary = {
        "verdict": verdict.model_dump(),
        "first_divergence": divergence_detected(traj, eps),
        "exit_after_entry": exit_after_entry(traj, eps),
        "final_clusters": clusters(traj.final, eps).count,
        "final_diameter": float(traj.diameters[-1]),
        "boundary_events": traj.boundary_hits.total,
        "final_graph": graph_summary(interaction_graph(traj.final, eps)).model_dump(),
        "theorem2": certify_theorem2(config.noise, eps).model_dump(),
        "theorem3": certify_theorem3(config.noise, eps).model_dump(),
    }
    typer.echo(f"verdict={verdict.status} T={verdict.T} final_clusters={summary['final_clusters']}")
    return [
        write_csv(trajectory_frame(traj), out_dir / "trajectory.csv"),
        write_csv(boundary_events_frame(traj.boundary_hits), out_dir / "boundary_events.csv"),
        save_json(summary, out_dir / SUMMARY_NAME),
    ]


def _execute_sweep(config: SimulationConfig, options: dict[str, Any], out_dir: Path) -> list[Path]:
    result = sweep_critical(
        options["ratios"],
        config,
        options.get("replicates"),
        n_jobs=options.get("jobs"),
    )
    summary = {"rows": [row.model_dump() for row in result.rows]}
    for row in result.rows:
        typer.echo(f"ratio={row.ratio:g} qc_freq={row.qc_freq:.3f} div_freq={row.div_freq:.3f}")
    return [
        write_csv(sweep_frame(result), out_dir / "sweep.csv"),
        save_json(summary, out_dir / SUMMARY_NAME),
    ]


def _execute_walk(config: SimulationConfig, options: dict[str, Any], out_dir: Path) -> list[Path]:
    replicate = options.get("replicate", 0)
    traj = run_trajectory(
        config, replicate_streams(config.master_seed, replicate), record_eta=True
    )
    assert traj.eta is not None
    record = walk_from_eta(traj.eta, config.noise, config.n, float(traj.initial.mean()))
    summary: dict[str, Any] = {
        "horizon": traj.horizon,
        "initial_mean": record.y0_mean,
        "final_S": float(record.S[-1]),
        "sign_changes": sign_changes(record.S),
        "analytic_variance": float(record.s2[-1]),
        "boundary_events": traj.boundary_hits.total,
        "every_agent_hit_both": traj.boundary_hits.hits_both(),
    }
    if config.noise.variance > 0:
        bounds = walk_variance_bounds(config.noise, config.n, traj.horizon)
        summary["variance_bounds"] = list(bounds)
    if options.get("check_identity", False):
        unclamped = run_unclamped(config, replicate_streams(config.master_seed, replicate))
        summary["closed_form_residual"] = unclamped.closed_form_residual
        summary["synchronized_until"] = unclamped.synchronized_until
        typer.echo(f"closed_form_residual={unclamped.closed_form_residual:.3e}")
    typer.echo(f"sign_changes={summary['sign_changes']} boundary_events={traj.boundary_hits.total}")
    return [
        write_csv(walk_frame(record), out_dir / "walk.csv"),
        write_csv(boundary_events_frame(traj.boundary_hits), out_dir / "boundary_events.csv"),
        save_json(summary, out_dir / SUMMARY_NAME),
    ]


def _execute_reproduce(
    config: SimulationConfig | None, options: dict[str, Any], out_dir: Path
) -> list[Path]:
    result = reproduce_scenario(options["name"], options.get("seed", 0), out_dir)
    typer.echo(
        f"scenario={result.name} seed={result.seed} verdict={result.verdict.status} "
        f"first_divergence={result.first_divergence} final_clusters={result.final_clusters}"
    )
    return result.outputs


Executor = Callable[[Any, dict[str, Any], Path], list[Path]]
EXECUTORS: dict[str, Executor] = {
    "run": _execute_run,
    "sweep": _execute_sweep,
    "walk": _execute_walk,
    "reproduce": _execute_reproduce,
}


def _execute(
    command: str,
    config: SimulationConfig | None,
    options: dict[str, Any],
    out_dir: Path,
) -> None:
    """Run an executor, then write the manifest next to its outputs."""
    started = datetime.now()
    try:
        outputs = EXECUTORS[command](config, options, out_dir)
    except (ValueError, NoisyHKError) as exc:
        logger.error(f"{command} failed: {exc}")
        raise _fail(str(exc), EXIT_RUNTIME) from exc
    manifest = build_manifest(
        command,
        outputs,
        started_at=started,
        config=config.model_dump(mode="json") if config else None,
        options=options,
        master_seed=config.master_seed if config else options.get("seed"),
    )
    path = save_manifest(manifest, out_dir)
    typer.echo(f"Wrote {len(outputs)} files and {path}")


def _show_version(value: bool) -> None:
    if value:
        typer.echo(f"noisyhk {__version__}")
        raise typer.Exit()


@app.callback()
def main_callback(
    log_level: Annotated[
        str | None, typer.Option("--log-level", help="Override NOISYHK_LOG_LEVEL")
    ] = None,
    version: Annotated[
        bool, typer.Option("--version", callback=_show_version, is_eager=True)
    ] = False,
) -> None:
    """Noisy Hegselmann-Krause opinion dynamics simulator."""
    level = (log_level or Settings().log_level).upper()
    _configure_logging(level)


@app.command()
def run(
    config_path: ConfigArg,
    seed: SeedOpt = None,
    horizon: HorizonOpt = None,
    out_dir: OutDirOpt = None,
    record_states: Annotated[
        bool, typer.Option("--record-states", help="Add x_0..x_{n-1} columns")
    ] = False,
    replicate: Annotated[int, typer.Option("--replicate", min=0)] = 0,
    wall_clock_seed: WallClockOpt = False,
) -> None:
    """Simulate one trajectory and write its per-step table."""
    config = _resolve_config(config_path, seed, horizon, wall_clock_seed)
    options = {"record_states": record_states, "replicate": replicate}
    _execute("run", config, options, _out_dir(out_dir, "run"))


def _parse_ratios(raw: str) -> list[float]:
    try:
        ratios = [float(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise _fail(f"invalid --ratios {raw!r}: {exc}", EXIT_USAGE) from exc
    if not ratios or any(r < 0 for r in ratios):
        raise _fail(f"--ratios needs non-negative values, got {raw!r}", EXIT_USAGE)
    return ratios


@app.command()
def sweep(
    config_path: ConfigArg,
    ratios: Annotated[str, typer.Option("--ratios", help="Comma-separated delta/eps ratios")],
    replicates: Annotated[int | None, typer.Option("--replicates", min=1)] = None,
    seed: SeedOpt = None,
    horizon: HorizonOpt = None,
    jobs: Annotated[int | None, typer.Option("--jobs", help="joblib workers")] = None,
    out_dir: OutDirOpt = None,
    wall_clock_seed: WallClockOpt = False,
) -> None:
    """Run one ensemble per noise ratio and write the frequency table."""
    config = _resolve_config(config_path, seed, horizon, wall_clock_seed)
    options = {"ratios": _parse_ratios(ratios), "replicates": replicates, "jobs": jobs}
    _execute("sweep", config, options, _out_dir(out_dir, "sweep"))


@app.command()
def walk(
    config_path: ConfigArg,
    seed: SeedOpt = None,
    horizon: HorizonOpt = None,
    out_dir: OutDirOpt = None,
    replicate: Annotated[int, typer.Option("--replicate", min=0)] = 0,
    check_identity: Annotated[
        bool, typer.Option("--check-identity", help="Verify the unclamped closed form")
    ] = False,
    wall_clock_seed: WallClockOpt = False,
) -> None:
    """Write the mean-noise walk and boundary events of one run."""
    config = _resolve_config(config_path, seed, horizon, wall_clock_seed)
    options = {"replicate": replicate, "check_identity": check_identity}
    _execute("walk", config, options, _out_dir(out_dir, "walk"))


@app.command()
def reproduce(
    name: Annotated[str, typer.Argument(help=f"Scenario: {', '.join(SCENARIOS)}")],
    seed: Annotated[int, typer.Option("--seed", min=0)] = 0,
    out_dir: OutDirOpt = None,
) -> None:
    """Reproduce a named scenario."""
    if name not in SCENARIOS:
        message = f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}"
        raise _fail(message, EXIT_USAGE)
    _execute("reproduce", None, {"name": name, "seed": seed}, _out_dir(out_dir, name))


@app.command()
def certify(config_path: ConfigArg) -> None:
    """Print both noise certificates for a config as JSON."""
    config = _resolve_config(config_path, None, None, False)
    sub = certify_theorem2(config.noise, config.epsilon)
    sup = certify_theorem3(config.noise, config.epsilon)
    typer.echo(sub.__class__.__name__ + " " + sub.model_dump_json())
    typer.echo(sup.__class__.__name__ + " " + sup.model_dump_json())


@app.command()
def replay(
    manifest_path: Annotated[Path, typer.Argument(help="manifest.json of an earlier run")],
    out_dir: OutDirOpt = None,
) -> None:
    """Re-execute a recorded command and verify every output hash."""
    try:
        manifest = load_manifest(manifest_path)
        config = SimulationConfig.model_validate(manifest.config) if manifest.config else None
    except (FileNotFoundError, ValueError) as exc:
        raise _fail(str(exc), EXIT_USAGE) from exc
    if manifest.command not in EXECUTORS:
        raise _fail(f"cannot replay command {manifest.command!r}", EXIT_USAGE)
    target = out_dir or Path(tempfile.mkdtemp(prefix="noisyhk-replay-"))
    _execute(manifest.command, config, manifest.options, target)

    replayed_manifest = load_manifest(target / MANIFEST_NAME)
    replayed = {entry.name: entry.sha256 for entry in replayed_manifest.outputs}
    mismatched = [e.name for e in manifest.outputs if replayed.get(e.name) != e.sha256]
    if mismatched:
        exc = ReplayMismatchError(f"outputs differ from the manifest: {', '.join(mismatched)}")
        logger.error(str(exc))
        raise _fail(str(exc), EXIT_RUNTIME)
    typer.echo(f"Replay verified {len(manifest.outputs)} files in {target}")


def main() -> None:
    """Console entry point mapping usage errors to exit code 1."""
    try:
        code = app(standalone_mode=False)
    except USAGE_ERRORS as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except ABORTS:
        sys.exit(EXIT_USAGE)
    sys.exit(code or 0)

