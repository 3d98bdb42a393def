"""Two-point-flux diffusion in space, applied independently per size cell."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError
from .size_grid import KernelTables, SizeGrid
from .spatial_mesh import SpatialMesh


@dataclass(frozen=True, eq=False)
class State:
    """Densities ``f[K, i]`` on spatial cell ``K`` and size cell ``i``."""

    f: np.ndarray
    mesh: SpatialMesh
    grid: SizeGrid

    def __post_init__(self):
        f = np.ascontiguousarray(self.f, dtype=float)
        expected = (self.mesh.n_cells, self.grid.n_size)
        if f.shape != expected:
            raise ConfigurationError(f"state shape {f.shape} does not match mesh x grid {expected}")
        if not np.all(np.isfinite(f)):
            raise ConfigurationError("state has non-finite entries")
        if np.any(f < 0):
            raise ConfigurationError(f"state has negative entries (min {f.min():.3g})")
        object.__setattr__(self, "f", f)

    def with_values(self, f: np.ndarray) -> "State":
        return State(f, self.mesh, self.grid)


def apply_to_array(
    f: np.ndarray, mesh: SpatialMesh, grid: SizeGrid, tables: KernelTables
) -> np.ndarray:
    indptr, neighbor, tau = mesh.adjacency
    bindptr, bedge, btau = mesh.dirichlet_adjacency
    g = mesh.dirichlet_values(grid)
    if g.shape[0] == 0:
        g = np.zeros((1, grid.n_size))
    out = np.empty_like(f)
    _kernels.diffusion_sweep(f, tables.d, indptr, neighbor, tau, bindptr, bedge, btau, g, out)
    return out


def diffusion_apply(state: State, tables: KernelTables) -> np.ndarray:
    """``d[i] * sum_sigma tau_sigma * D_{K,sigma} f_{K,i}`` for every ``(K, i)``.

    ``D`` is ``f_L - f_K`` across interior edges, 0 on Neumann edges and
    ``g - f_K`` on Dirichlet edges. Not divided by the cell measure.
    """
    return apply_to_array(state.f, state.mesh, state.grid, tables)


def _as_reference(state: State, reference) -> np.ndarray:
    M = getattr(reference, "M", reference)
    return np.broadcast_to(np.asarray(M, dtype=float), state.f.shape)


def _log(x):
    return np.log(np.maximum(x, 1e-300))


def diffusion_entropy_flux(state: State, tables: KernelTables, reference) -> float:
    """Contribution of the diffusion term to the rate of change of ``H(f|M)``.

    Interior edges are summed pairwise, where ``M`` cancels:
    ``-dy * d[i] * tau * (f_L - f_K) * (ln f_L - ln f_K)``, which is never
    positive. Dirichlet edges add ``dy * d[i] * tau * (g - f_K) * ln(f_K / M_i)``.
    """
    mesh, grid = state.mesh, state.grid
    f = state.f
    fK, fL = f[mesh.left], f[mesh.right]
    interior = -np.sum(mesh.tau[:, None] * tables.d * (fL - fK) * (_log(fL) - _log(fK)))
    total = interior
    if not mesh.all_neumann:
        M = _as_reference(state, reference)
        edges = np.flatnonzero(mesh.dirichlet_mask)
        cells = mesh.bcell[edges]
        g = mesh.dirichlet_values(grid)[edges]
        fb = f[cells]
        total += np.sum(
            mesh.btau[edges][:, None] * tables.d * (g - fb) * (_log(fb) - _log(M[cells]))
        )
    return float(grid.dy * total)


def logarithmic_mean(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``(u - v) / (ln u - ln v)``, equal to ``u`` where ``u == v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (u - v) / (np.log(u) - np.log(v))
    return np.where(u == v, u, out)
