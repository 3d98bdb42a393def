"""End-to-end acceptance checks; each prints one PASS/FAIL line in the summary."""

import time

import numpy as np
import pytest
from conftest import report
from oracles import euler_0d, scan_alpha

from cofrag import (
    KernelTables,
    SimConfig,
    State,
    build_cartesian_mesh,
    build_kernel_tables,
    build_size_grid,
    detailed_balance_profile,
    discrete_volume,
    fluxes,
    q_classical,
    q_from_fluxes,
    run,
    solve_alpha,
    step,
    weak_form,
)
from cofrag.cf_kernel import dissipation_rows
from cofrag.config import build_problem, load_config
from cofrag.diagnostics import fit_decay_rate, projection_x2
from cofrag.size_grid import constant_diffusion, constant_rate


def random_kernel(rng, n):
    a = rng.uniform(0, 2, (n, n))
    b = rng.uniform(0, 2, (n, n))
    return KernelTables(0.5 * (a + a.T), 0.5 * (b + b.T), np.ones(n))


def random_row(rng, n):
    return rng.uniform(0, 1, n) * (rng.uniform(size=n) > 0.1)


def test_01_flux_classical_equivalence():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(1000):
        n = (4, 8, 16, 64)[k % 4]
        g = build_size_grid(float(rng.uniform(1, 30)), n)
        t = random_kernel(rng, n)
        row = random_row(rng, n)
        c, fr = fluxes(row, t, g)
        q1 = q_from_fluxes(c, fr, g)[1:]
        q2 = q_classical(row, t, g)[1:]
        # relative to the row's largest entry; single entries can be cancellation residues
        worst = max(worst, float(np.max(np.abs(q1 - q2)) / max(np.abs(q2).max(), 1e-300)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 5
    report(1, "flux/classical equivalence", ok, f"max normwise rel diff {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_02_weak_form_identity():
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(1000):
        n = (4, 8, 16, 64)[k % 4]
        g = build_size_grid(float(rng.uniform(1, 30)), n)
        t = random_kernel(rng, n)
        row = random_row(rng, n)
        phi = rng.normal(size=n)
        lhs = g.dy * float(np.dot(q_classical(row, t, g), phi))
        rhs = weak_form(row, t, g, phi)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-11 and elapsed < 5
    report(2, "weak-form identity", ok, f"max rel diff {worst:.2e}, {elapsed:.2f}s")
    assert ok


@pytest.fixture(scope="module")
def ab_small_run():
    man = load_config("ab-neumann", {"nx": 16, "ny": 16, "nsize": 32, "dt": 0.002, "t_end": 2.0})
    man.params["run"]["diag_every"] = 10
    p = build_problem(man)
    assert p.config.n_steps == 1000 and p.config.positivity_mode == "strict"
    t0 = time.perf_counter()
    res = run(p.initial, p.config, p.tables, p.reference)
    return p, res, time.perf_counter() - t0


def test_03_volume_conservation(ab_small_run):
    p, res, elapsed = ab_small_run
    m1 = np.array([r.m1 for r in res.records])
    drift = float(np.max(np.abs(m1 - m1[0])) / m1[0])
    ok = res.steps == 1000 and drift <= 1e-10 and elapsed < 30
    report(3, "volume conservation", ok, f"max relative m1 drift {drift:.2e} over {res.steps} steps, {elapsed:.1f}s")
    assert ok


def test_04_positivity(ab_small_run):
    p, res, _ = ab_small_run
    mins = [r.min_f for r in res.records]
    ok = res.steps == 1000 and min(mins) >= 0 and res.records[-1].clamp_count == 0
    report(4, "positivity (strict mode)", ok, f"min_f over records {min(mins):.3e}, clamps {res.records[-1].clamp_count}")
    assert ok


def test_05_dissipation_sign_and_equilibrium():
    rng = np.random.default_rng(505)
    lowest = np.inf
    for k in range(1000):
        n = (4, 8, 16, 64)[k % 4]
        g = build_size_grid(float(rng.uniform(1, 30)), n)
        d, _ = dissipation_rows(random_row(rng, n)[None, :], random_kernel(rng, n), g)
        lowest = min(lowest, float(d[0]))
    g = build_size_grid(20.0, 64)
    mesh = build_cartesian_mesh((-0.5, 0.5), (-0.5, 0.5), 8, 8)
    tab = build_kernel_tables(g, constant_rate(), constant_rate(), constant_diffusion(0.1))
    M = detailed_balance_profile(0.9, g).M
    qmax = float(np.max(np.abs(q_classical(M, tab, g))))
    s = State(np.tile(M, (mesh.n_cells, 1)), mesh, g)
    moved = float(np.max(np.abs(step(s, SimConfig(dt=0.002, t_end=1.0), tab).f - s.f)))
    ok = lowest >= 0 and qmax <= 1e-12 and moved <= 1e-12
    report(5, "dissipation sign and equilibrium", ok,
           f"min D {lowest:.3e}, max|Q(M)| {qmax:.2e}, step change {moved:.2e}")
    assert ok


def test_06_entropy_decay():
    man = load_config("ab-neumann", {"nx": 32, "ny": 32, "nsize": 64, "dt": 0.002, "t_end": 4.0})
    p = build_problem(man)
    t0 = time.perf_counter()
    res = run(p.initial, p.config, p.tables, p.reference)
    elapsed = time.perf_counter() - t0
    h = np.array([r.h_global for r in res.records])
    slack = 1e-8 * (1 + np.abs(h[:-1]))
    monotone = bool(np.all(np.diff(h) <= slack))
    rate, r2 = fit_decay_rate(res.records, "h_global", window=(1.0, 4.0))
    ratio = h[-1] / h[0]
    ok = monotone and rate < 0 and r2 >= 0.99 and ratio <= 1e-3 and elapsed < 300
    report(6, "entropy decay", ok,
           f"monotone={monotone}, rate {rate:.4f}, r2 {r2:.6f}, H(end)/H(0) {ratio:.2e}, {elapsed:.1f}s")
    assert ok


def test_07_zero_dimensional_oracle():
    # R = 1 keeps the size-cell rates moderate so a first-order step of 5e-6 is well inside 1e-6
    g = build_size_grid(1.0, 8)
    mesh = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 1, 1)
    tab = build_kernel_tables(g, constant_rate(), constant_rate(), constant_diffusion(0.1))
    row = np.random.default_rng(707).uniform(0, 1, 8)
    dt = 5e-6
    cfg = SimConfig(dt=dt, t_end=1.0, steady_tol=1e-300, diag_every=10**9)
    res = run(State(row[None, :], mesh, g), cfg, tab)
    oracle = euler_0d(row, tab.a, tab.b, g.dy, dt / 100, cfg.n_steps * 100)
    err = float(np.max(np.abs(res.state.f[0] - oracle)) / np.max(np.abs(oracle)))
    ok = res.steps == cfg.n_steps and err <= 1e-6
    report(7, "0-D oracle equivalence", ok, f"relative max error {err:.2e} at t=1 (dt={dt:g})")
    assert ok


def test_08_sqrt_kernel_steady_state():
    man = load_config("sqrt-kernel", {"nx": 16, "ny": 16, "nsize": 32, "dt": 0.002, "t_end": 100.0})
    p = build_problem(man)
    res = run(p.initial, p.config, p.tables)
    m1 = np.array([r.m1 for r in res.records])
    drift = float(np.max(np.abs(m1 - m1[0])) / m1[0])
    f = res.state.f
    spread = float(np.max(f.max(axis=0) - f.min(axis=0)) / f.max())
    half = p.grid.n_size // 2
    y, logf = p.grid.centers[half:], np.log(f.mean(axis=0)[half:])
    slope, icpt = np.polyfit(y, logf, 1)
    r2 = 1 - np.sum((logf - (slope * y + icpt)) ** 2) / np.sum((logf - logf.mean()) ** 2)
    ok = drift <= 1e-10 and res.converged and spread <= 1e-6 and slope < 0 and r2 >= 0.95
    report(8, "sqrt-kernel steady state", ok,
           f"m1 drift {drift:.2e}, steady={res.converged} at t={res.steps * p.config.dt:.2f}, "
           f"spatial spread {spread:.2e}, tail slope {slope:.3f} r2 {r2:.4f}")
    assert ok


def test_09_dirichlet_channel():
    man = load_config("dirichlet-channel", {"nx": 8, "ny": 32, "nsize": 32, "dt": 0.002, "t_end": 10.0})
    p = build_problem(man)
    res = run(p.initial, p.config, p.tables)
    m1 = np.array([r.m1 for r in res.records])
    change = float(np.max(np.abs(m1 - m1[0])) / m1[0])
    worst = 0.0
    hy, dy = p.mesh.cartesian.hy, p.grid.dy
    for _, _, snap in res.snapshots + [(None, None, res.state)]:
        P = projection_x2(snap)
        target = discrete_volume(snap)
        worst = max(worst, abs(P.sum() * hy * dy - target) / target)
    clauses = {
        "completes": res.steps > 0,
        "m1 changes": change > 1e-6,
        "steady before t=10": res.converged,
        "projection identity": worst <= 1e-12,
    }
    ok = all(clauses.values())
    failed = [k for k, v in clauses.items() if not v]
    report(9, "Dirichlet channel", ok,
           f"m1 change {change:.2e}, steady={res.converged} (rate {res.steady_rate:.2e} vs tol "
           f"{p.config.steady_tol:g} at t={res.steps * p.config.dt:.2f}), projection residual {worst:.1e}"
           + (f"; failing: {', '.join(failed)}" if failed else ""))
    assert ok, f"failing clauses: {failed}"


def test_10_solve_alpha_oracle():
    rng = np.random.default_rng(1010)
    g = build_size_grid(20.0, 64)
    mesh = build_cartesian_mesh((-0.5, 0.5), (-0.5, 0.5), 1, 1)
    weight = mesh.domain_area * g.dy * g.left_edges
    worst_trip = worst_scan = 0.0
    for _ in range(100):
        alpha0 = float(np.exp(rng.uniform(np.log(0.02), np.log(20.0))))
        target = discrete_volume(State(detailed_balance_profile(alpha0, g).M[None, :], mesh, g))
        alpha = solve_alpha(target, g, mesh).alpha
        worst_trip = max(worst_trip, abs(alpha - alpha0) / alpha0)
        oracle = scan_alpha(target, g.left_edges, weight, n=20001)
        worst_scan = max(worst_scan, abs(alpha - oracle) / oracle)
    ok = worst_trip <= 1e-8 and worst_scan <= 1e-8
    report(10, "solve_alpha oracle", ok, f"round trip {worst_trip:.2e}, scan oracle {worst_scan:.2e}")
    assert ok
