"""File formats: trajectory CSV/JSON, cosmic reports, ball-map CSV, snapshots.

Every file carries ``schema_version`` and the resolved config.  JSON is
written with sorted keys so identical runs give identical bytes.  CSV files
start with one ``#`` comment line holding the same metadata.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .engine import Checkpoint, Trajectory, ball_map

SCHEMA_VERSION = 1


def _meta(config):
    return {"schema_version": SCHEMA_VERSION, "config": config}


def write_json(path, payload: dict, config=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {**_meta(config), **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows, config=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write("# " + json.dumps(_meta(config), sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def read_csv(path):
    """Return ``(meta, header, rows)`` with numeric cells converted to float."""
    with Path(path).open() as fh:
        first = fh.readline()
        meta = json.loads(first[2:]) if first.startswith("# ") else {}
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[_num(c) for c in row] for row in reader]
    return meta, header, rows


def _num(cell):
    try:
        return float(cell)
    except ValueError:
        return cell


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "label": traj.label,
        "start": traj.start.tolist(),
        "n_steps": traj.n_steps,
        "stopped_by_guard": traj.stopped_by_guard,
        "crossings": {str(j): k for j, k in sorted(traj.crossings.items())},
        "final_pair": [traj.final_pair[0].tolist(), traj.final_pair[1].tolist()],
        "checkpoints": [
            {
                "k": c.k,
                "x": c.x.tolist(),
                "step": None if c.step is None else c.step.tolist(),
                "level": c.level,
            }
            for c in traj.checkpoints
        ],
    }


def trajectory_from_dict(data: dict) -> Trajectory:
    checkpoints = [
        Checkpoint(
            int(c["k"]),
            np.array(c["x"], dtype=float),
            None if c["step"] is None else np.array(c["step"], dtype=float),
            c["level"],
        )
        for c in data["checkpoints"]
    ]
    prev, last = (np.array(v, dtype=float) for v in data["final_pair"])
    return Trajectory(
        data["label"],
        np.array(data["start"], dtype=float),
        checkpoints,
        (prev, last),
        int(data["n_steps"]),
        {int(j): int(k) for j, k in data["crossings"].items()},
        bool(data["stopped_by_guard"]),
    )


def trajectory_rows(traj: Trajectory):
    """CSV header and rows ``k, coord_1..coord_d, norm[, level]``."""
    d = len(traj.start)
    has_level = any(c.level is not None for c in traj.checkpoints)
    header = ["k"] + [f"coord_{i}" for i in range(1, d + 1)] + ["norm"] + (["level"] if has_level else [])
    rows = []
    for c in traj.checkpoints:
        row = [c.k, *c.x.tolist(), float(np.linalg.norm(c.x))]
        if has_level:
            row.append(c.level)
        rows.append(row)
    return header, rows


def ballmap_rows(traj: Trajectory):
    d = len(traj.start)
    header = ["k"] + [f"b_{i}" for i in range(1, d + 1)]
    return header, [[c.k, *ball_map(c.x).tolist()] for c in traj.checkpoints]


def snapshot_rows(traj: Trajectory):
    """Long format ``k, i, x_i`` for sequence-space snapshots."""
    rows = []
    for c in traj.checkpoints:
        rows.extend([c.k, i, float(v)] for i, v in enumerate(c.x, 1))
    return ["k", "i", "x_i"], rows
