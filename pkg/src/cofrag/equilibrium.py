"""Discrete equilibria and the volume-matching exponent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .diffusion import State
from .errors import ContractError, InfeasibleError
from .size_grid import SizeGrid
from .spatial_mesh import SpatialMesh

ProfileForm = Callable[[float], np.ndarray]

VOLUME_RTOL = 1e-12
_BRACKET = (1e-8, 1e8)
_MAX_BISECTIONS = 200
_MONOTONE_SAMPLE = np.logspace(-4, 4, 33)


@dataclass(frozen=True, eq=False)
class EquilibriumProfile:
    """Spatially uniform profile ``M[i]`` with decay exponent ``alpha``."""

    alpha: float
    M: np.ndarray


def discrete_volume(state: State) -> float:
    """The conserved quantity ``sum_{K,i} m(K) dy y_{i-1/2} f[K, i]``."""
    grid = state.grid
    per_cell = state.f @ grid.left_edges
    return float(grid.dy * np.dot(state.mesh.measure, per_cell))


def exponential_form(grid: SizeGrid) -> ProfileForm:
    """``alpha -> exp(-alpha * y_{i-1/2})``, the exact discrete annihilator for ``a = b``."""
    w = grid.left_edges

    def form(alpha: float) -> np.ndarray:
        return np.exp(-alpha * w)

    return form


def detailed_balance_profile(alpha: float, grid: SizeGrid) -> EquilibriumProfile:
    if not alpha > 0:
        raise ContractError(f"equilibrium exponent must be positive, got {alpha!r}")
    return EquilibriumProfile(float(alpha), exponential_form(grid)(alpha))


def _bisect_decreasing(volume, targets: np.ndarray) -> np.ndarray:
    """Solve ``volume(alpha) = targets`` elementwise for a decreasing ``volume``.

    ``volume`` maps an array of exponents to an array of volumes. The bracket
    starts at ``[1e-8, 1e8]`` and is widened by decades as needed.
    """
    lo = np.full(targets.shape, _BRACKET[0])
    hi = np.full(targets.shape, _BRACKET[1])
    for _ in range(320):
        low = volume(lo) < targets
        if not low.any():
            break
        lo[low] *= 0.1
    else:
        raise InfeasibleError("target volume too close to the alpha -> 0 limit")
    for _ in range(320):
        high = volume(hi) > targets
        if not high.any():
            break
        hi[high] *= 10.0
    else:
        raise InfeasibleError("target volume too small to bracket")

    for _ in range(_MAX_BISECTIONS):
        geometric = hi > 2.0 * lo
        mid = np.where(geometric, np.sqrt(lo * hi), 0.5 * (lo + hi))
        done = (mid <= lo) | (mid >= hi)
        if done.all():
            break
        above = volume(mid) > targets
        lo = np.where(~done & above, mid, lo)
        hi = np.where(~done & ~above, mid, hi)

    v_lo, v_hi = volume(lo), volume(hi)
    return np.where(np.abs(v_lo - targets) <= np.abs(v_hi - targets), lo, hi)


def solve_alpha(
    target_volume: float,
    grid: SizeGrid,
    mesh: SpatialMesh,
    profile_form: Optional[ProfileForm] = None,
) -> EquilibriumProfile:
    """Exponent of the uniform profile whose discrete volume on ``mesh`` is ``target_volume``."""
    if profile_form is None:
        profile_form = exponential_form(grid)
    weight = mesh.domain_area * grid.dy * grid.left_edges

    def volume(alphas):
        return np.array([weight @ profile_form(float(al)) for al in np.atleast_1d(alphas)])

    v_max = float(weight @ profile_form(0.0))
    if not (0.0 < target_volume < v_max):
        raise InfeasibleError(
            f"target volume {target_volume!r} outside the attainable range (0, {v_max!r})"
        )
    sample = volume(_MONOTONE_SAMPLE)
    step = np.diff(sample)
    if np.any(step > 0) or np.any((step == 0) & (sample[1:] > 0)):
        raise ContractError("profile_form does not give a strictly decreasing volume")

    alpha = float(_bisect_decreasing(volume, np.array([float(target_volume)]))[0])
    reached = float(volume(alpha)[0])
    if abs(reached - target_volume) > VOLUME_RTOL * target_volume:
        raise InfeasibleError(
            f"alpha={alpha!r} reaches volume {reached!r}, target {target_volume!r}"
        )
    return EquilibriumProfile(alpha, profile_form(alpha))


def global_equilibrium(state: State) -> EquilibriumProfile:
    """Uniform detailed-balance profile carrying the volume of ``state``."""
    return solve_alpha(discrete_volume(state), state.grid, state.mesh)


def local_alphas(f: np.ndarray, grid: SizeGrid) -> np.ndarray:
    """Per-row exponents matching each row's volume; 0 marks an empty row."""
    f = np.atleast_2d(np.asarray(f, dtype=float))
    w = grid.left_edges
    targets = grid.dy * (f @ w)
    alphas = np.zeros(f.shape[0])
    active = targets > 0
    if not active.any():
        return alphas
    v_max = grid.dy * w.sum()
    if np.any(targets[active] >= v_max):
        k = int(np.flatnonzero(active & (targets >= v_max))[0])
        raise InfeasibleError(
            f"cell {k} carries volume {targets[k]!r} >= attainable maximum {v_max!r}"
        )

    def volume(al):
        return grid.dy * (np.exp(-np.outer(al, w)) @ w)

    alphas[active] = _bisect_decreasing(volume, targets[active])
    return alphas


def local_equilibrium(state: State, grid: Optional[SizeGrid] = None) -> np.ndarray:
    """Cellwise detailed-balance profiles carrying each cell's own volume."""
    grid = grid or state.grid
    alphas = local_alphas(state.f, grid)
    out = np.exp(-np.outer(alphas, grid.left_edges))
    out[alphas == 0] = 0.0
    return out
