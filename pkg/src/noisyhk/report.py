"""Data-file output: trajectory, sweep and walk tables, summaries and manifests.

Tables are written with pandas; every file is first written to a temporary
sibling and then renamed into place.
"""

import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Any

import pandas as pd
from loguru import logger

from noisyhk import __version__
from noisyhk.dynamics.walk import lil_series
from noisyhk.models import (
    BoundaryHitLog,
    OutputFile,
    RunManifest,
    SweepResult,
    Trajectory,
    WalkRecord,
)

MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary.json"
SWEEP_COLUMNS = [
    "ratio",
    "n",
    "epsilon",
    "replicates",
    "qc_freq",
    "mean_T",
    "median_T",
    "div_freq",
    "mean_first_div_t",
    "master_seed",
]


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """Per-step table: t, d_V, n_clusters, min, max and optionally x_0..x_{n-1}."""
    frame = pd.DataFrame(
        {
            "t": range(traj.horizon + 1),
            "d_V": traj.diameters,
            "n_clusters": traj.n_clusters,
            "min": traj.minima,
            "max": traj.maxima,
        }
    )
    if traj.states is not None:
        agents = pd.DataFrame(traj.states, columns=[f"x_{i}" for i in range(traj.n)])
        frame = pd.concat([frame, agents], axis=1)
    return frame


def boundary_events_frame(hits: BoundaryHitLog) -> pd.DataFrame:
    """One row per clamp event: t, agent, boundary."""
    return pd.DataFrame(hits.events(), columns=["t", "agent", "boundary"])


def walk_frame(record: WalkRecord) -> pd.DataFrame:
    """Walk table: t, eta, S, s2_analytic, lil_stat (empty where undefined)."""
    eta = [float("nan"), *record.eta.tolist()]
    return pd.DataFrame(
        {
            "t": range(record.horizon + 1),
            "eta": eta,
            "S": record.S,
            "s2_analytic": record.s2,
            "lil_stat": lil_series(record),
        }
    )


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """Sweep table, one row per ratio in input order."""
    rows = [row.model_dump(include=set(SWEEP_COLUMNS)) for row in result.rows]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def _atomic_target(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.with_name(path.name + ".tmp")


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """Write a table without index and move it into place."""
    tmp = _atomic_target(path)
    frame.to_csv(tmp, index=False, lineterminator="\n")
    tmp.replace(path)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def save_json(data: dict[str, Any], path: Path) -> Path:
    """Write a JSON document with sorted keys and move it into place."""
    tmp = _atomic_target(path)
    with open(tmp, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    tmp.replace(path)
    logger.info(f"Wrote {path}")
    return path


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(
    command: str,
    outputs: list[Path],
    *,
    started_at: datetime,
    config: dict[str, Any] | None = None,
    options: dict[str, Any] | None = None,
    master_seed: int | None = None,
) -> RunManifest:
    """Describe an invocation together with hashes of the files it wrote."""
    return RunManifest(
        command=command,
        software_version=__version__,
        master_seed=master_seed,
        started_at=started_at,
        finished_at=datetime.now(),
        config=config,
        options=options or {},
        outputs=[OutputFile(name=p.name, sha256=file_sha256(p)) for p in outputs],
    )


def save_manifest(manifest: RunManifest, out_dir: Path) -> Path:
    return save_json(manifest.model_dump(mode="json"), out_dir / MANIFEST_NAME)


def load_manifest(path: Path) -> RunManifest:
    """Load a manifest from JSON.

    Raises:
        FileNotFoundError: If the manifest does not exist
    """
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    with open(path) as f:
        return RunManifest.model_validate(json.load(f))
