"""Explicit time integration of the semi-discrete system and run diagnostics."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, fields
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .cf_kernel import dissipation_rows, q_classical
from .diffusion import State, apply_to_array
from .equilibrium import EquilibriumProfile, local_equilibrium
from .errors import ConfigurationError, ConservationError, DomainError, PositivityError
from .size_grid import KernelTables, SizeGrid
from .spatial_mesh import SpatialMesh, mesh_regularity

logger = logging.getLogger(__name__)

POSITIVITY_MODES = ("strict", "clamp")
SCHEMES = ("euler", "heun")
CONSERVATION_RTOL = 1e-12


class StabilityWarning(UserWarning):
    """The time step exceeds the explicit stability estimate."""


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    diag_every: int = 10
    snapshot_times: Sequence[float] = ()
    steady_tol: float = 1e-8
    positivity_mode: str = "strict"
    scheme: str = "euler"
    min_regularity: float = 0.1
    check_conservation: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt >= 0):
            raise ConfigurationError(f"dt must be nonnegative, got {self.dt!r}")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigurationError(f"t_end must be positive, got {self.t_end!r}")
        if int(self.diag_every) != self.diag_every or self.diag_every < 1:
            raise ConfigurationError(f"diag_every must be a positive integer, got {self.diag_every!r}")
        if not self.steady_tol > 0:
            raise ConfigurationError(f"steady_tol must be positive, got {self.steady_tol!r}")
        if self.positivity_mode not in POSITIVITY_MODES:
            raise ConfigurationError(f"positivity_mode must be one of {POSITIVITY_MODES}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}")
        object.__setattr__(self, "snapshot_times", tuple(sorted(float(t) for t in self.snapshot_times)))

    @property
    def n_steps(self) -> int:
        if self.dt == 0:
            return 0
        ratio = self.t_end / self.dt
        nearest = round(ratio)
        return int(nearest) if abs(ratio - nearest) < 1e-9 * max(1.0, ratio) else int(math.floor(ratio))


@dataclass
class DiagnosticsRecord:
    t: float
    m0: float
    m1: float
    m2: float
    m3: float
    h_global: float
    h_local: float
    h_locglobal: float
    dissipation: float
    mass_residual: float
    min_f: float
    clamp_count: int

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def values(self) -> tuple:
        return tuple(getattr(self, name) for name in self.columns())


class RunResult(NamedTuple):
    state: State
    records: list
    snapshots: list
    converged: bool
    steps: int
    steady_rate: float


Reference = Union[np.ndarray, EquilibriumProfile]


def _rhs_array(f, mesh: SpatialMesh, grid: SizeGrid, tables: KernelTables) -> np.ndarray:
    out = q_classical(f, tables, grid)
    if mesh.left.size or not mesh.all_neumann:
        out += apply_to_array(f, mesh, grid, tables) / mesh.measure[:, None]
    return out


def rhs(
    state: State,
    tables: KernelTables,
    grid: Optional[SizeGrid] = None,
    mesh: Optional[SpatialMesh] = None,
) -> np.ndarray:
    """Time derivative ``diffusion / m(K) + Q`` of every ``f[K, i]``."""
    return _rhs_array(state.f, mesh or state.mesh, grid or state.grid, tables)


def _volume(f, mesh: SpatialMesh, grid: SizeGrid) -> float:
    return float(grid.dy * np.dot(mesh.measure, f @ grid.left_edges))


def _advance(f, dt, cfg: SimConfig, mesh, grid, tables):
    """One step on raw arrays; returns the new array and the number of clamped entries."""
    if dt == 0:
        return f.copy(), 0
    new = f + dt * _rhs_array(f, mesh, grid, tables)
    if cfg.scheme == "heun":
        new = 0.5 * (f + new + dt * _rhs_array(new, mesh, grid, tables))
    if not np.all(np.isfinite(new)):
        raise PositivityError(f"non-finite density after a step of dt={dt:g}")
    clamped = 0
    if new.min() < 0:
        if cfg.positivity_mode == "strict":
            K, i = np.unravel_index(np.argmin(new), new.shape)
            raise PositivityError(
                f"negative density {new[K, i]:.3e} at cell {K}, size {i} after dt={dt:g}; "
                "reduce dt"
            )
        neg = new < 0
        clamped = int(np.count_nonzero(neg))
        new[neg] = 0.0
    return new, clamped


def step(state: State, cfg: SimConfig, tables: KernelTables) -> State:
    """Advance by ``cfg.dt``; volume drift is checked on all-Neumann meshes."""
    mesh, grid = state.mesh, state.grid
    new, clamped = _advance(state.f, cfg.dt, cfg, mesh, grid, tables)
    if cfg.check_conservation and mesh.all_neumann and clamped == 0:
        before, after = _volume(state.f, mesh, grid), _volume(new, mesh, grid)
        if abs(after - before) > CONSERVATION_RTOL * before:
            raise ConservationError(f"volume changed from {before!r} to {after!r} in one step")
    return state.with_values(new)


def stable_dt_estimate(f, mesh: SpatialMesh, grid: SizeGrid, tables: KernelTables) -> float:
    """Heuristic explicit step bound: reciprocal of the largest loss rate."""
    n = grid.n_size
    i, k = np.indices((n, n))
    coag = grid.dy * (f @ np.where(i + k < n, tables.a, 0.0).T)
    frag = 0.5 * grid.dy * np.array([tables.b[np.arange(m + 1), m - np.arange(m + 1)].sum()
                                     for m in range(n)])
    tau_sum = np.zeros(mesh.n_cells)
    np.add.at(tau_sum, mesh.left, mesh.tau)
    np.add.at(tau_sum, mesh.right, mesh.tau)
    np.add.at(tau_sum, mesh.bcell[mesh.dirichlet_mask], mesh.btau[mesh.dirichlet_mask])
    spatial = np.outer(tau_sum / mesh.measure, tables.d)
    rate = np.max(spatial + coag + frag)
    return math.inf if rate <= 0 else 1.0 / rate


def _phi(r: np.ndarray) -> np.ndarray:
    """``r ln r - r + 1``, accurate near ``r = 1``."""
    u = r - 1.0
    small = np.abs(u) < 1e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.where(r > 0, r * np.log(np.where(r > 0, r, 1.0)) - u, 1.0)
    series = u * u * (0.5 - u * (1.0 / 6.0 - u * (1.0 / 12.0 - u / 20.0)))
    return np.where(small, series, direct)


def relative_entropy(state: State, reference: Reference) -> float:
    """``sum m(K) dy [f (ln(f/M) - 1) + M]`` with ``0 ln 0 = 0``."""
    f = state.f
    M = np.broadcast_to(np.asarray(getattr(reference, "M", reference), dtype=float), f.shape)
    if np.any((M <= 0) & (f > 0)):
        raise DomainError("reference vanishes where the state is positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(M > 0, f / np.where(M > 0, M, 1.0), 0.0)
    density = np.where(M > 0, M * _phi(r), 0.0)
    return float(state.grid.dy * np.dot(state.mesh.measure, density.sum(axis=1)))


def moments(
    state: State, grid: Optional[SizeGrid] = None, mesh: Optional[SpatialMesh] = None
) -> tuple[float, float, float, float]:
    """``m_p = sum m(K) dy w_i^p f[K, i]`` for ``p = 0..3`` with ``w_i = y_{i-1/2}``."""
    grid = grid or state.grid
    mesh = mesh or state.mesh
    w = grid.left_edges
    return tuple(
        float(grid.dy * np.dot(mesh.measure, state.f @ (w**p if p != 1 else w)))
        for p in range(4)
    )


def record_diagnostics(
    state: State,
    t: float,
    tables: KernelTables,
    reference: Optional[EquilibriumProfile] = None,
    m1_initial: Optional[float] = None,
    clamp_count: int = 0,
) -> DiagnosticsRecord:
    m0, m1, m2, m3 = moments(state)
    if reference is not None:
        M_loc = local_equilibrium(state)
        h_global = relative_entropy(state, reference)
        h_local = relative_entropy(state, M_loc)
        h_locglobal = relative_entropy(state.with_values(M_loc), reference)
    else:
        h_global = h_local = h_locglobal = math.nan
    diss, _ = dissipation_rows(state.f, tables, state.grid)
    m1_initial = m1 if m1_initial is None else m1_initial
    residual = (m1 - m1_initial) / m1_initial if m1_initial > 0 else m1 - m1_initial
    return DiagnosticsRecord(
        t=float(t), m0=m0, m1=m1, m2=m2, m3=m3,
        h_global=h_global, h_local=h_local, h_locglobal=h_locglobal,
        dissipation=float(np.dot(state.mesh.measure, diss)),
        mass_residual=float(residual), min_f=float(state.f.min()),
        clamp_count=int(clamp_count),
    )


def run(
    initial: State,
    cfg: SimConfig,
    tables: KernelTables,
    reference: Optional[EquilibriumProfile] = None,
) -> RunResult:
    """Step until ``cfg.t_end`` or until the state stops changing.

    The run is steady once ``max |f_new - f| / (dt (1 + |f|))`` drops below
    ``cfg.steady_tol``. Diagnostics are recorded at ``t = 0``, every
    ``cfg.diag_every`` steps and at the last step; ``reference`` enables the
    entropy columns. Snapshots are taken at the first step reaching each of
    ``cfg.snapshot_times``.
    """
    mesh, grid = initial.mesh, initial.grid
    xi = mesh_regularity(mesh)
    if xi < cfg.min_regularity:
        raise ConfigurationError(f"mesh regularity {xi:.3g} below the minimum {cfg.min_regularity:g}")
    n_steps = cfg.n_steps
    conserve = cfg.check_conservation and mesh.all_neumann

    f = initial.f.copy()
    m1_0 = v_prev = _volume(f, mesh, grid)
    clamps = 0
    records = [record_diagnostics(initial, 0.0, tables, reference, m1_0, clamps)]
    pending = list(cfg.snapshot_times)
    snapshots = []

    def take_snapshots(t, arr):
        while pending and t >= pending[0] - 0.5 * cfg.dt:
            snapshots.append((pending.pop(0), t, initial.with_values(arr.copy())))

    take_snapshots(0.0, f)
    check_dt(f, cfg, mesh, grid, tables)

    converged = False
    rate = math.inf
    n = 0
    while n < n_steps:
        new, c = _advance(f, cfg.dt, cfg, mesh, grid, tables)
        clamps += c
        n += 1
        t = n * cfg.dt
        if conserve and c == 0:
            v_new = _volume(new, mesh, grid)
            if abs(v_new - v_prev) > CONSERVATION_RTOL * m1_0:
                raise ConservationError(f"volume changed by {v_new - v_prev:.3e} at step {n}")
            v_prev = v_new
        rate = float(np.max(np.abs(new - f) / (cfg.dt * (1.0 + np.abs(f)))))
        f = new
        take_snapshots(t, f)
        converged = rate < cfg.steady_tol
        if converged or n % cfg.diag_every == 0 or n == n_steps:
            records.append(record_diagnostics(initial.with_values(f), t, tables, reference, m1_0, clamps))
            logger.info("t=%.4f m1=%.15g rate=%.3e", t, records[-1].m1, rate)
            if n % cfg.diag_every == 0:
                check_dt(f, cfg, mesh, grid, tables)
        if converged:
            logger.info("steady state reached at t=%.4f (rate %.3e)", t, rate)
            break
    return RunResult(initial.with_values(f), records, snapshots, converged, n, rate)


def check_dt(f, cfg: SimConfig, mesh, grid, tables) -> None:
    limit = stable_dt_estimate(f, mesh, grid, tables)
    if cfg.dt > limit:
        warnings.warn(
            f"dt={cfg.dt:g} exceeds the explicit stability estimate {limit:.3g}",
            StabilityWarning,
            stacklevel=3,
        )
