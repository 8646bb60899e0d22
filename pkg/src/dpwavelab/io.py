"""State and trajectory persistence: JSON states, CSV snapshots, binary frames with sidecar."""

from __future__ import annotations

import csv
import json

import numpy as np

from .evolution import Trajectory
from .grid import Field, make_grid


def save_state(field: Field, path: str) -> None:
    doc = {"n": field.grid.n, "period": field.grid.period, "samples": field.samples.tolist()}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_state(path: str) -> Field:
    with open(path) as fh:
        doc = json.load(fh)
    grid = make_grid(doc["n"], doc["period"])
    return Field(grid, np.asarray(doc["samples"], dtype=float))


def save_trajectory_csv(traj: Trajectory, path: str) -> None:
    """Long-format rows (t, x, u), one row per node per stored frame."""
    grid = traj.states[0].grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "u"])
        for t, state in zip(traj.times, traj.states):
            for x, u in zip(grid.nodes, state.samples):
                writer.writerow([repr(t), repr(float(x)), repr(float(u))])


def save_trajectory_binary(traj: Trajectory, frames_path: str, sidecar_path: str) -> None:
    """Row-major float64 frames plus a JSON sidecar {n, period, times}."""
    grid = traj.states[0].grid
    frames = np.stack([s.samples for s in traj.states])
    frames.astype("<f8").tofile(frames_path)
    with open(sidecar_path, "w") as fh:
        json.dump({"n": grid.n, "period": grid.period, "times": list(traj.times)}, fh)


def load_trajectory_binary(frames_path: str, sidecar_path: str) -> Trajectory:
    with open(sidecar_path) as fh:
        meta = json.load(fh)
    grid = make_grid(meta["n"], meta["period"])
    frames = np.fromfile(frames_path, dtype="<f8").reshape(len(meta["times"]), grid.n)
    traj = Trajectory()
    for t, row in zip(meta["times"], frames):
        traj.times.append(float(t))
        traj.states.append(Field(grid, row.copy()))
    return traj
