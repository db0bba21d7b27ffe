"""
Output files: field CSVs written with pandas and report.json.

Numbers carry 17 significant digits, rows are time-major and node-minor,
and nothing run-dependent (timestamps, paths) is written, so identical
inputs give byte-identical files.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ddlab.continuation import ContinuationResult
from ddlab.errors import OutputError
from ddlab.grid import Grid
from ddlab.reports import RunReport
from ddlab.solver import Trajectory
from ddlab.utils import FLOAT_DIGITS, ensure_dir

logger = logging.getLogger("ddlab.outputs")
logger.setLevel(logging.DEBUG)

FLOAT_FORMAT = f"%.{FLOAT_DIGITS}g"
SNAPSHOT_COLUMNS = ["time", "node_index", "x", "u", "v"]
DIAGNOSTIC_COLUMNS = ["time", "energy", "dissipation", "min_u", "max_u", "picard_iters"]

Result = Union[Trajectory, ContinuationResult, None]


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise OutputError(str(path), str(e)) from e
    logger.debug(f"wrote {path} ({len(frame)} rows)")
    return path


def snapshots_frame(traj: Trajectory) -> pd.DataFrame:
    """One row per (time, node), time-major."""
    times, u, v = traj.as_arrays()
    n = traj.grid.n
    return pd.DataFrame(
        {
            "time": np.repeat(times, n),
            "node_index": np.tile(np.arange(n), len(times)),
            "x": np.tile(traj.grid.nodes, len(times)),
            "u": u.reshape(-1),
            "v": v.reshape(-1),
        },
        columns=SNAPSHOT_COLUMNS,
    )


def diagnostics_frame(traj: Trajectory) -> pd.DataFrame:
    rows = [d.to_dict() for d in traj.diagnostics]
    return pd.DataFrame(rows, columns=DIAGNOSTIC_COLUMNS)


def write_trajectory(traj: Trajectory, outdir: Path) -> List[Path]:
    """snapshots.csv and diagnostics.csv for one solve."""
    outdir = Path(outdir)
    return [
        _write_csv(snapshots_frame(traj), outdir / "snapshots.csv"),
        _write_csv(diagnostics_frame(traj), outdir / "diagnostics.csv"),
    ]


def write_continuation(result: ContinuationResult, outdir: Path) -> List[Path]:
    """eps_<k>/snapshots.csv and eps_<k>/diagnostics.csv per completed level."""
    written = []
    for k, (eps, traj) in enumerate(zip(result.epsilons, result.trajectories)):
        if traj is None:
            continue
        level_dir = ensure_dir(str(Path(outdir) / f"eps_{k}"))
        written.extend(write_trajectory(traj, level_dir))
    return written


def write_barenblatt_table(
    grid: Grid, times: Sequence[float], values: Sequence[np.ndarray], outdir: Path
) -> Path:
    """barenblatt.csv with columns time, node_index, x, exact."""
    n = grid.n
    frame = pd.DataFrame(
        {
            "time": np.repeat(np.asarray(times, dtype=float), n),
            "node_index": np.tile(np.arange(n), len(times)),
            "x": np.tile(grid.nodes, len(times)),
            "exact": np.concatenate([np.asarray(v, dtype=float) for v in values]) if len(values) else [],
        },
        columns=["time", "node_index", "x", "exact"],
    )
    return _write_csv(frame, Path(outdir) / "barenblatt.csv")


def write_report(report: RunReport, outdir: Path) -> Path:
    """report.json with sorted keys and 2-space indentation."""
    path = Path(outdir) / "report.json"
    try:
        with open(path, "w") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True, allow_nan=False)
            f.write("\n")
    except OSError as e:
        raise OutputError(str(path), str(e)) from e
    return path


def emit_outputs(result: Result, report: Optional[RunReport], outdir: Union[str, Path]) -> List[Path]:
    """
    Write every file a run produces.

    Args:
        result: a Trajectory, a ContinuationResult or None (report only)
        report: the run report, written as report.json when given
        outdir: output directory, created if missing

    Returns:
        Paths written, in write order
    """
    try:
        out = ensure_dir(str(outdir))
    except OSError as e:
        raise OutputError(str(outdir), str(e)) from e

    written: List[Path] = []
    if isinstance(result, Trajectory):
        written.extend(write_trajectory(result, out))
    elif isinstance(result, ContinuationResult):
        written.extend(write_continuation(result, out))
    if report is not None:
        written.append(write_report(report, out))
    return written
