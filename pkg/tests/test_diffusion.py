import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cofrag import (
    BoundaryProfile,
    ConfigurationError,
    KernelTables,
    State,
    build_cartesian_mesh,
    build_kernel_tables,
    build_size_grid,
    diffusion_apply,
    diffusion_entropy_flux,
    tag_boundary,
)
from cofrag.diffusion import logarithmic_mean
from cofrag.size_grid import constant_diffusion, constant_rate, inverse_linear_diffusion


def tables_with_d(d):
    n = len(d)
    return KernelTables(np.ones((n, n)), np.ones((n, n)), np.asarray(d, dtype=float))


def test_uniform_state_neumann_is_zero():
    g = build_size_grid(4.0, 4)
    m = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 3, 4)
    t = build_kernel_tables(g, constant_rate(), constant_rate(), inverse_linear_diffusion(0.3))
    f = np.tile(np.exp(-g.centers), (m.n_cells, 1))
    assert not diffusion_apply(State(f, m, g), t).any()


def test_two_cell_single_edge():
    g = build_size_grid(2.0, 2)
    m = build_cartesian_mesh((0.0, 1.0), (0.0, 2.0), 1, 2)
    assert m.tau.tolist() == [1.0]
    t = tables_with_d([0.1, 0.1])
    out = diffusion_apply(State(np.array([[0.0, 0.0], [1.0, 1.0]]), m, g), t)
    np.testing.assert_array_equal(out, [[0.1, 0.1], [-0.1, -0.1]])


def test_dirichlet_edge_with_matching_data_contributes_nothing():
    g = build_size_grid(2.0, 2)
    m = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 1, 1)
    prof = BoundaryProfile("match", lambda x1, x2, y: np.exp(-y))
    m = tag_boundary(m, lambda x1, x2: np.isclose(x1, 0.0), prof)
    f = np.exp(-g.centers)[None, :]
    t = tables_with_d([1.0, 1.0])
    np.testing.assert_array_equal(diffusion_apply(State(f, m, g), t), 0.0)


def test_dirichlet_edge_value():
    g = build_size_grid(2.0, 2)
    m = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 1, 1)
    m = tag_boundary(m, lambda x1, x2: np.isclose(x1, 0.0), BoundaryProfile("two", lambda x1, x2, y: 2.0 + 0 * y))
    t = tables_with_d([0.5, 1.0])
    out = diffusion_apply(State(np.ones((1, 2)), m, g), t)
    # tau = 1 / 0.5, flux d * tau * (g - f)
    np.testing.assert_allclose(out, [[0.5 * 2.0, 1.0 * 2.0]])


def test_entropy_flux_two_cell():
    g = build_size_grid(2.0, 2)
    m = build_cartesian_mesh((0.0, 1.0), (0.0, 2.0), 1, 2)
    t = tables_with_d([1.0, 0.0])
    st_ = State(np.array([[1.0, 1.0], [math.e, 1.0]]), m, g)
    val = diffusion_entropy_flux(st_, t, np.ones(2))
    assert val == pytest.approx(-(math.e - 1.0), rel=1e-15)
    assert val == pytest.approx(-1.718281828459045, rel=1e-15)


def test_entropy_flux_uniform_state_is_zero():
    g = build_size_grid(4.0, 4)
    m = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 3, 3)
    t = build_kernel_tables(g, constant_rate(), constant_rate(), constant_diffusion(0.1))
    f = np.tile(np.exp(-g.centers), (m.n_cells, 1))
    assert diffusion_entropy_flux(State(f, m, g), t, np.exp(-g.left_edges)) == 0.0


@st.composite
def diffusion_problems(draw, dirichlet=st.booleans()):
    nx, ny, n = draw(st.integers(1, 6)), draw(st.integers(1, 6)), draw(st.integers(2, 8))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    g = build_size_grid(float(rng.uniform(1, 10)), n)
    m = build_cartesian_mesh((0.0, float(rng.uniform(0.1, 2))), (0.0, float(rng.uniform(0.1, 2))), nx, ny)
    if draw(dirichlet):
        m = tag_boundary(m, lambda x1, x2: np.isclose(x1, 0.0), BoundaryProfile("e", lambda x1, x2, y: np.exp(-y * (1 + x2))))
    t = build_kernel_tables(g, constant_rate(), constant_rate(), inverse_linear_diffusion(float(rng.uniform(0.01, 1))))
    f = rng.uniform(0.01, 1, (m.n_cells, n))
    return g, m, t, State(f, m, g), rng


@given(diffusion_problems(dirichlet=st.just(False)))
def test_neumann_diffusion_conserves_every_size_cell(p):
    g, m, t, s, _ = p
    out = diffusion_apply(s, t)
    assert np.all(np.abs(out.sum(axis=0)) <= 1e-13 * (1 + np.abs(out).sum(axis=0)))


@given(diffusion_problems(dirichlet=st.just(False)))
def test_neumann_diffusion_is_symmetric_and_nonpositive(p):
    g, m, t, s, rng = p
    h = rng.uniform(0, 1, s.f.shape)
    a_f = diffusion_apply(s, t)
    a_h = diffusion_apply(s.with_values(h), t)
    assert np.sum(h * a_f) == pytest.approx(np.sum(s.f * a_h), rel=1e-12, abs=1e-14)
    assert np.sum(s.f * a_f) <= 1e-14


@given(diffusion_problems())
def test_entropy_flux_matches_pointwise_pairing(p):
    g, m, t, s, rng = p
    M = np.exp(-float(rng.uniform(0.1, 2)) * g.left_edges)
    direct = g.dy * np.sum(diffusion_apply(s, t) * np.log(s.f / M))
    val = diffusion_entropy_flux(s, t, M)
    assert val == pytest.approx(direct, rel=1e-11, abs=1e-13)
    if m.all_neumann:
        assert val <= 0


def test_logarithmic_mean():
    np.testing.assert_array_equal(logarithmic_mean(np.array([2.0]), np.array([2.0])), [2.0])
    assert logarithmic_mean(np.array([math.e]), np.array([1.0]))[0] == pytest.approx(math.e - 1, rel=1e-15)
    assert logarithmic_mean(np.array([1.0]), np.array([math.e]))[0] == pytest.approx(math.e - 1, rel=1e-15)


def test_state_validation():
    g = build_size_grid(2.0, 2)
    m = build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 1, 2)
    with pytest.raises(ConfigurationError, match="shape"):
        State(np.ones((1, 2)), m, g)
    with pytest.raises(ConfigurationError, match="negative"):
        State(np.array([[1.0, -1.0], [1.0, 1.0]]), m, g)
    with pytest.raises(ConfigurationError, match="non-finite"):
        State(np.array([[1.0, np.nan], [1.0, 1.0]]), m, g)
