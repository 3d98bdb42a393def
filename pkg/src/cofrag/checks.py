"""Fast randomized self-checks of the discrete invariants, used by ``cofrag check``."""

from __future__ import annotations

import time
from typing import Callable, NamedTuple

import numpy as np

from .cf_kernel import dissipation_rows, fluxes, q_classical, q_from_fluxes, weak_form
from .diagnostics import entropy_split_residual
from .diffusion import State, apply_to_array, diffusion_entropy_flux
from .equilibrium import detailed_balance_profile, discrete_volume, global_equilibrium
from .evolution import SimConfig, relative_entropy, rhs, stable_dt_estimate, step
from .models import make_kernel
from .size_grid import build_kernel_tables, build_size_grid, constant_rate, inverse_linear_diffusion
from .spatial_mesh import build_cartesian_mesh


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _random_problem(rng: np.random.Generator, kernel: str = "constant"):
    grid = build_size_grid(float(rng.uniform(2.0, 10.0)), int(rng.integers(4, 17)))
    mesh = build_cartesian_mesh((0.0, 1.0), (0.0, float(rng.uniform(0.5, 2.0))),
                                int(rng.integers(2, 7)), int(rng.integers(2, 7)))
    # equal constant rates keep detailed balance; otherwise draw a random fragmentation rate
    b_rate = 1.0 if kernel == "constant" else float(rng.uniform(0.5, 2.0))
    tables = build_kernel_tables(grid, make_kernel(kernel), constant_rate(b_rate),
                                 inverse_linear_diffusion(float(rng.uniform(0.01, 0.5))))
    f = rng.uniform(0.0, 1.0, (mesh.n_cells, grid.n_size)) * np.exp(-grid.centers)
    return grid, mesh, tables, State(f, mesh, grid)


def _flux_vs_classical(rng):
    worst = 0.0
    for _ in range(20):
        grid, _, tables, st = _random_problem(rng, "product-sqrt")
        row = st.f[0]
        c, fr = fluxes(row, tables, grid)
        q1 = q_from_fluxes(c, fr, grid, row, tables)
        q2 = q_classical(row, tables, grid)
        worst = max(worst, float(np.max(np.abs(q1 - q2)) / (1.0 + np.max(np.abs(q2)))))
    return worst < 1e-12, f"max rel diff {worst:.2e}"


def _weak_form(rng):
    worst = 0.0
    for _ in range(20):
        grid, _, tables, st = _random_problem(rng, "product-sqrt")
        phi = rng.normal(size=grid.n_size)
        row = st.f[0]
        lhs = grid.dy * float(np.dot(phi, q_classical(row, tables, grid)))
        rhs_ = weak_form(row, tables, grid, phi)
        worst = max(worst, abs(lhs - rhs_) / (1.0 + abs(lhs)))
    return worst < 1e-12, f"max rel diff {worst:.2e}"


def _volume_conservation(rng):
    worst = 0.0
    for _ in range(20):
        grid, mesh, tables, st = _random_problem(rng, "product-sqrt")
        dv = grid.dy * float(np.dot(mesh.measure, rhs(st, tables) @ grid.left_edges))
        worst = max(worst, abs(dv) / discrete_volume(st))
    return worst < 1e-12, f"max |dV/dt|/V {worst:.2e}"


def _dissipation_sign(rng):
    lowest = np.inf
    for _ in range(20):
        grid, _, tables, st = _random_problem(rng, "product-sqrt")
        d, _ = dissipation_rows(st.f, tables, grid)
        lowest = min(lowest, float(d.min()))
    return lowest >= 0.0, f"min dissipation {lowest:.3e}"


def _equilibrium_annihilated(rng):
    worst = 0.0
    for _ in range(20):
        grid, _, tables, _ = _random_problem(rng, "constant")
        M = detailed_balance_profile(float(rng.uniform(0.1, 3.0)), grid).M
        worst = max(worst, float(np.max(np.abs(q_classical(M, tables, grid)))))
    return worst < 1e-12, f"max |Q(M)| {worst:.2e}"


def _entropy_identity(rng):
    # dH/dt from the right-hand side against -D + diffusion entropy flux
    worst = 0.0
    for _ in range(10):
        grid, mesh, tables, st = _random_problem(rng, "constant")
        st = st.with_values(st.f + 1e-3)
        ref = global_equilibrium(st)
        dhdt = grid.dy * float(np.sum(mesh.measure[:, None] * rhs(st, tables) * np.log(st.f / ref.M)))
        d, _ = dissipation_rows(st.f, tables, grid)
        pred = -float(np.dot(mesh.measure, d)) + diffusion_entropy_flux(st, tables, ref)
        worst = max(worst, abs(dhdt - pred) / (1.0 + abs(dhdt)))
    return worst < 1e-10, f"max rel diff {worst:.2e}"


def _entropy_split(rng):
    worst = 0.0
    for _ in range(10):
        _, _, _, st = _random_problem(rng, "constant")
        worst = max(worst, entropy_split_residual(st, global_equilibrium(st)))
    return worst < 1e-10, f"max residual {worst:.2e}"


def _positivity_and_descent(rng):
    ok = True
    for _ in range(10):
        grid, mesh, tables, st = _random_problem(rng, "constant")
        st = st.with_values(st.f + 1e-3)
        ref = global_equilibrium(st)
        dt = 0.5 * stable_dt_estimate(st.f, mesh, grid, tables)
        nxt = step(st, SimConfig(dt=dt, t_end=dt), tables)
        ok &= bool(nxt.f.min() >= 0)
        ok &= relative_entropy(nxt, ref) <= relative_entropy(st, ref) + 1e-12
    return ok, "explicit step at half the stability estimate"


def _diffusion_neumann_sum(rng):
    worst = 0.0
    for _ in range(20):
        grid, mesh, tables, st = _random_problem(rng, "constant")
        total = apply_to_array(st.f, mesh, grid, tables).sum(axis=0)
        worst = max(worst, float(np.max(np.abs(total))))
    return worst < 1e-13, f"max column sum {worst:.2e}"


CHECKS: tuple[tuple[str, Callable], ...] = (
    ("flux form matches classical form", _flux_vs_classical),
    ("weak form identity", _weak_form),
    ("volume conservation of the right-hand side", _volume_conservation),
    ("dissipation is nonnegative", _dissipation_sign),
    ("detailed-balance profile is stationary", _equilibrium_annihilated),
    ("entropy production identity", _entropy_identity),
    ("entropy split identity", _entropy_split),
    ("positivity and entropy descent of one step", _positivity_and_descent),
    ("Neumann diffusion conserves each size cell", _diffusion_neumann_sum),
)


def run_checks(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, not an abort
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), f"{detail} ({time.perf_counter() - t0:.2f}s)"))
    return out
