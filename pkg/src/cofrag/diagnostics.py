"""Post-processing of runs: decay fits, entropy split, spatial fields, projections."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .diffusion import State
from .equilibrium import EquilibriumProfile, local_equilibrium
from .errors import ConfigurationError, DomainError, UnsupportedOperation
from .evolution import DiagnosticsRecord, relative_entropy
from .size_grid import SizeGrid
from .spatial_mesh import SpatialMesh


def size_weights(grid: SizeGrid, weight: str = "edge") -> np.ndarray:
    """Size coordinate used in y-moments: left edges (conserved) or centers."""
    if weight == "edge":
        return grid.left_edges
    if weight == "center":
        return grid.centers
    raise ConfigurationError(f"weight must be 'edge' or 'center', got {weight!r}")


def fit_decay_rate(
    records: Sequence[DiagnosticsRecord],
    field: str = "h_global",
    window: Optional[tuple[float, float]] = None,
) -> tuple[float, float]:
    """Least-squares slope of ``ln(value)`` against ``t`` and its ``r**2``.

    ``window`` selects records with ``t0 <= t <= t1``; by default the last
    half of the records is used. A constant series has slope 0 and ``r**2 = 1``.
    """
    if window is None:
        chosen = list(records)[len(records) // 2:]
    else:
        t0, t1 = window
        chosen = [r for r in records if t0 <= r.t <= t1]
    if len(chosen) < 3:
        raise DomainError(f"need at least 3 records in the fit window, got {len(chosen)}")
    t = np.array([r.t for r in chosen])
    v = np.array([getattr(r, field) for r in chosen], dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise DomainError(f"{field} is not positive over the window; shrink the window")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    ss_tot = np.sum((logv - logv.mean()) ** 2)
    if ss_tot == 0:
        return 0.0, 1.0
    ss_res = np.sum((logv - (slope * t + intercept)) ** 2)
    return float(slope), float(max(0.0, 1.0 - ss_res / ss_tot))


def entropy_split(state: State, global_eq: EquilibriumProfile):
    """``(H(f|M), H(f|M_loc), H(M_loc|M))`` each evaluated from the entropy formula."""
    M_loc = local_equilibrium(state)
    return (
        relative_entropy(state, global_eq),
        relative_entropy(state, M_loc),
        relative_entropy(state.with_values(M_loc), global_eq),
    )


def entropy_split_residual(
    state: State,
    global_eq: EquilibriumProfile,
    grid: Optional[SizeGrid] = None,
    mesh: Optional[SpatialMesh] = None,
) -> float:
    h, h_loc, h_lg = entropy_split(state, global_eq)
    return abs(h - h_loc - h_lg) / (1.0 + h)


def spatial_fields(
    state: State,
    grid: Optional[SizeGrid] = None,
    mesh: Optional[SpatialMesh] = None,
    weight: str = "edge",
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell number density ``M0`` and volume density ``M1``."""
    grid = grid or state.grid
    w = size_weights(grid, weight)
    return grid.dy * state.f.sum(axis=1), grid.dy * (state.f @ w)


def projection_x2(
    state: State,
    grid: Optional[SizeGrid] = None,
    mesh: Optional[SpatialMesh] = None,
    weight: str = "edge",
) -> np.ndarray:
    """``P[r, i]``: integral over x1 of ``y f`` along mesh row ``r`` for size cell ``i``."""
    grid = grid or state.grid
    mesh = mesh or state.mesh
    layout = mesh.cartesian
    if layout is None:
        raise UnsupportedOperation("projection_x2 needs a Cartesian mesh")
    w = size_weights(grid, weight)
    rows = (state.f * (mesh.measure / layout.hy)[:, None]).reshape(layout.ny, layout.nx, -1)
    return rows.sum(axis=1) * w
