"""Columnar CSV serialisation of trajectories and observation sets.

Values are written with 17 significant digits so a write/read cycle is
bit-exact for float64.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DimensionError
from .ou import ObservationSet, Trajectory

FLOAT_FMT = "%.17g"


def _write_table(path, header: list[str], rows: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        if rows.size:
            np.savetxt(fh, rows, fmt=FLOAT_FMT, delimiter=",")


def _read_table(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
        data = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(header))
    if data.shape[1] != len(header):
        raise DimensionError(f"{path}: {data.shape[1]} columns but header has {len(header)}")
    return header, data


def write_trajectory(traj: Trajectory, states_path, ledger_path) -> None:
    d = traj.dim
    _write_table(states_path, ["t"] + [f"x_{j + 1}" for j in range(d)], np.column_stack([traj.times, traj.states]))
    steps = np.arange(traj.steps, dtype=float)
    _write_table(ledger_path, ["step"] + [f"j_{j + 1}" for j in range(d)], np.column_stack([steps, traj.jumps]))


def read_trajectory(states_path, ledger_path) -> Trajectory:
    _, states = _read_table(states_path)
    _, ledger = _read_table(ledger_path)
    dt = float(states[1, 0] - states[0, 0])
    return Trajectory(dt, states[:, 1:], ledger[:, 1:])


def write_observations(obs: ObservationSet, path, cont_path=None) -> None:
    d = obs.dim
    _write_table(path, ["t"] + [f"x_{j + 1}" for j in range(d)], np.column_stack([obs.times, obs.obs]))
    if cont_path is not None and obs.cont_increments is not None:
        idx = np.arange(1, obs.n + 1, dtype=float)
        _write_table(cont_path, ["i"] + [f"dxc_{j + 1}" for j in range(d)], np.column_stack([idx, obs.cont_increments]))


def read_observations(path, cont_path=None) -> ObservationSet:
    _, data = _read_table(path)
    delta = float(data[1, 0] - data[0, 0])
    cont = None
    if cont_path is not None and Path(cont_path).exists():
        cont = _read_table(cont_path)[1][:, 1:]
    return ObservationSet(delta, data[:, 1:], cont)
