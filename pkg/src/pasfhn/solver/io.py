"""CSV / JSON dumps of trajectories and run manifests."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..source import SourceParams, tail_ratio
from .grid import Grid, Trajectory


def write_trajectory_csv(path, traj: Trajectory, grid: Grid) -> Path:
    """Rows (t, x, u1, u2), sample-major then grid point."""
    path = Path(path)
    x = grid.x
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "u1", "u2"])
        for k in range(len(traj)):
            t = traj.times[k]
            for xi, a, b in zip(x, traj.u1[k], traj.u2[k]):
                w.writerow([repr(float(t)), repr(float(xi)), repr(float(a)), repr(float(b))])
    return path


def read_trajectory_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    times = np.unique(data[:, 0])
    n = data.shape[0] // times.size
    return times, data[:, 1][:n], data[:, 2].reshape(times.size, n), data[:, 3].reshape(times.size, n)


def run_manifest(traj: Trajectory, grid: Grid, source: SourceParams = None) -> dict:
    out = {
        "grid": {"half_extent": grid.half_extent, "n_points": grid.n_points, "dx": grid.dx},
        "dt": traj.meta.get("dt"),
        "n_steps": traj.meta.get("n_steps"),
        "sample_every": traj.meta.get("sample_every"),
        "tag": traj.meta.get("tag"),
        "backend": traj.meta.get("backend"),
    }
    if source is not None:
        out["truncation"] = {"X": grid.half_extent, "tail_over_delta": tail_ratio(source, grid.half_extent)}
    return out


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable))
    return path


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
