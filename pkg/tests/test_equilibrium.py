import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import scan_alpha

from cofrag import (
    ContractError,
    InfeasibleError,
    State,
    build_cartesian_mesh,
    build_size_grid,
    detailed_balance_profile,
    discrete_volume,
    global_equilibrium,
    local_equilibrium,
    solve_alpha,
)
from cofrag.equilibrium import local_alphas
from cofrag.models import CosineField, ExponentialDatum, cell_average


def test_discrete_volume_examples(single_cell):
    g = build_size_grid(2.0, 2)
    assert discrete_volume(State(np.zeros((1, 2)), single_cell, g)) == 0.0
    assert discrete_volume(State(np.ones((1, 2)), single_cell, g)) == 1.0


def test_profile_ln2():
    g = build_size_grid(3.0, 3)
    np.testing.assert_allclose(detailed_balance_profile(math.log(2), g).M, [1.0, 0.5, 0.25], rtol=1e-15)


@pytest.mark.parametrize("alpha", [0.0, -1.0, np.nan])
def test_profile_rejects_nonpositive(alpha):
    with pytest.raises(ContractError):
        detailed_balance_profile(alpha, build_size_grid(3.0, 3))


def test_solve_alpha_round_trip(single_cell):
    g = build_size_grid(20.0, 64)
    M = detailed_balance_profile(1.0, g).M
    target = discrete_volume(State(M[None, :], single_cell, g))
    assert solve_alpha(target, g, single_cell).alpha == pytest.approx(1.0, abs=1e-10)


def test_solve_alpha_infeasible(single_cell):
    g = build_size_grid(20.0, 64)
    v_max = g.dy * g.left_edges.sum()
    for target in (2 * v_max, v_max, 0.0, -1.0):
        with pytest.raises(InfeasibleError):
            solve_alpha(target, g, single_cell)


def test_solve_alpha_rejects_increasing_form(single_cell):
    g = build_size_grid(4.0, 4)
    with pytest.raises(ContractError):
        solve_alpha(1.0, g, single_cell, profile_form=lambda a: np.full(4, 1.0 + a))


def test_solve_alpha_matches_scan_on_initial_datum():
    g = build_size_grid(20.0, 64)
    mesh = build_cartesian_mesh((-0.5, 0.5), (-0.5, 0.5), 16, 16)
    f0 = cell_average(ExponentialDatum("exp-rate", CosineField(1.0, 0.1, 2.0, 2.0)), g, mesh)
    v = discrete_volume(f0)
    oracle = scan_alpha(v, g.left_edges, mesh.domain_area * g.dy * g.left_edges)
    assert global_equilibrium(f0).alpha == pytest.approx(oracle, rel=1e-8)


@given(st.floats(0.01, 20.0), st.floats(1.0, 40.0), st.integers(2, 80))
def test_round_trip_property(alpha, R, n):
    g = build_size_grid(R, n)
    mesh = build_cartesian_mesh((0.0, 2.0), (0.0, 0.5), 1, 1)
    M = detailed_balance_profile(alpha, g).M
    eq = solve_alpha(discrete_volume(State(M[None, :], mesh, g)), g, mesh)
    # the volume is matched to 1e-12; alpha is as well-determined as dV/dalpha allows
    assert discrete_volume(State(eq.M[None, :], mesh, g)) == pytest.approx(
        discrete_volume(State(M[None, :], mesh, g)), rel=1e-12
    )


def test_local_equilibrium_fixed_point():
    g = build_size_grid(10.0, 16)
    mesh = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 3, 2)
    M = detailed_balance_profile(0.7, g).M
    s = State(np.tile(M, (6, 1)), mesh, g)
    np.testing.assert_allclose(local_equilibrium(s), s.f, rtol=1e-10)


def test_local_equilibrium_zero_cell():
    g = build_size_grid(10.0, 16)
    mesh = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 2, 1)
    f = np.vstack([np.zeros(16), np.exp(-g.centers)])
    loc = local_equilibrium(State(f, mesh, g))
    assert not loc[0].any()
    assert g.dy * loc[1] @ g.left_edges == pytest.approx(g.dy * f[1] @ g.left_edges, rel=1e-12)


def test_local_alphas_infeasible_row():
    g = build_size_grid(2.0, 4)
    with pytest.raises(InfeasibleError, match="cell 1"):
        local_alphas(np.vstack([np.full(4, 0.1), np.full(4, 5.0)]), g)


@given(st.integers(0, 2**32 - 1))
def test_local_alphas_match_scan(seed):
    rng = np.random.default_rng(seed)
    g = build_size_grid(float(rng.uniform(2, 30)), int(rng.integers(4, 40)))
    f = rng.uniform(0, 1, (3, g.n_size)) * np.exp(-rng.uniform(0.1, 2) * g.centers)
    al = local_alphas(f, g)
    for k in range(3):
        target = g.dy * f[k] @ g.left_edges
        assert g.dy * np.exp(-al[k] * g.left_edges) @ g.left_edges == pytest.approx(target, rel=1e-12)
