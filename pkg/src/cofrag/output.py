"""CSV writers for diagnostics and snapshots."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .diagnostics import projection_x2, spatial_fields
from .diffusion import State
from .errors import ConfigurationError
from .evolution import DiagnosticsRecord

SNAPSHOT_KINDS = ("fields", "projection")


def _cell(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17g}"


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_diagnostics(records: Sequence[DiagnosticsRecord], path) -> Path:
    path = Path(path)
    _write_rows(path, DiagnosticsRecord.columns(), (r.values() for r in records))
    return path


def write_snapshot(state: State, kind: str, path) -> Path:
    """``fields``: one row per cell ``x1, x2, m0, m1``.
    ``projection``: one row per (mesh row, size cell) ``x2, y, p``; ``y`` is the cell center.
    """
    path = Path(path)
    if kind == "fields":
        m0, m1 = spatial_fields(state)
        c = state.mesh.centers
        _write_rows(path, ("x1", "x2", "m0", "m1"), zip(c[:, 0], c[:, 1], m0, m1))
    elif kind == "projection":
        p = projection_x2(state)
        layout = state.mesh.cartesian
        x2 = state.mesh.centers[:: layout.nx, 1]
        y = state.grid.centers
        rows = ((x2[r], y[i], p[r, i]) for r in range(p.shape[0]) for i in range(p.shape[1]))
        _write_rows(path, ("x2", "y", "p"), rows)
    else:
        raise ConfigurationError(f"unknown snapshot kind {kind!r}; expected one of {SNAPSHOT_KINDS}")
    return path


def snapshot_name(kind: str, t: float) -> str:
    return f"{kind}_t{t:.6g}.csv"
