"""Closed catalogue of kernels, diffusion laws, initial data and boundary data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffusion import State
from .errors import ConfigurationError, UnsupportedOperation
from .size_grid import (
    DiffusionFn,
    RateFn,
    SizeGrid,
    constant_diffusion,
    constant_rate,
    inverse_linear_diffusion,
    product_sqrt_rate,
)
from .spatial_mesh import BoundaryProfile, SpatialMesh

KERNELS = ("constant", "product-sqrt")
DIFFUSIONS = ("constant", "inverse-linear")
INITIAL_FORMS = ("exp-rate", "exp-scale")
_CHUNK_POINTS = 1 << 22


def make_kernel(kind: str, scale: float = 1.0) -> RateFn:
    if kind == "constant":
        return constant_rate(scale)
    if kind == "product-sqrt":
        return product_sqrt_rate(scale)
    raise ConfigurationError(f"unknown kernel {kind!r}; expected one of {KERNELS}")


def make_diffusion(kind: str, scale: float) -> DiffusionFn:
    if kind == "constant":
        return constant_diffusion(scale)
    if kind == "inverse-linear":
        return inverse_linear_diffusion(scale)
    raise ConfigurationError(f"unknown diffusion {kind!r}; expected one of {DIFFUSIONS}")


@dataclass(frozen=True)
class CosineField:
    """``mean + amp * cos(k1 pi x1) * cos(k2 pi x2)``."""

    mean: float
    amp: float
    k1: float
    k2: float

    def __call__(self, x1, x2):
        return self.mean + self.amp * np.cos(self.k1 * np.pi * x1) * np.cos(self.k2 * np.pi * x2)


@dataclass(frozen=True)
class ExponentialDatum:
    """Initial density ``exp(-rate(x) y)``.

    ``form="exp-rate"`` uses ``rate = alpha(x)``; ``form="exp-scale"`` uses
    ``rate = 1 / alpha(x)`` (a vanishing ``alpha`` gives a zero density).
    """

    form: str
    alpha: CosineField

    def __post_init__(self):
        if self.form not in INITIAL_FORMS:
            raise ConfigurationError(f"unknown initial form {self.form!r}; expected one of {INITIAL_FORMS}")

    def rate(self, x1, x2):
        a = self.alpha(x1, x2)
        if np.any(a < 0):
            raise ConfigurationError("initial-datum alpha(x) is negative somewhere")
        if self.form == "exp-rate":
            return a
        with np.errstate(divide="ignore"):
            return 1.0 / a

    def size_average(self, rate, grid: SizeGrid) -> np.ndarray:
        """Average of ``exp(-rate y)`` over every size cell; ``rate`` broadcasts to the front."""
        rate = np.asarray(rate, dtype=float)[..., None]
        lo = grid.left_edges
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = np.exp(-rate * lo) * -np.expm1(-rate * grid.dy) / (rate * grid.dy)
        val = np.where(rate == 0, 1.0, val)
        return np.where(np.isinf(rate), 0.0, val)


def cell_average(datum: ExponentialDatum, grid: SizeGrid, mesh: SpatialMesh, order: int = 32) -> State:
    """Initial state from exact cell averages over ``K x Lambda_i``.

    Exact in size; tensor Gauss-Legendre with ``order`` nodes per direction
    inside each rectangle. The datum is smooth but steep where ``alpha(x)``
    nears zero, so the default order is generous.
    """
    layout = mesh.cartesian
    if layout is None:
        raise UnsupportedOperation("cell averages need a Cartesian mesh")
    if order < 1:
        raise ConfigurationError(f"quadrature order must be positive, got {order!r}")
    nodes, wts = np.polynomial.legendre.leggauss(order)
    ox = np.repeat(0.5 * layout.hx * nodes, order)
    oy = np.tile(0.5 * layout.hy * nodes, order)
    w2 = 0.25 * np.outer(wts, wts).ravel()
    f = np.empty((mesh.n_cells, grid.n_size))
    chunk = max(1, _CHUNK_POINTS // (order * order * grid.n_size))
    for k0 in range(0, mesh.n_cells, chunk):
        c = mesh.centers[k0:k0 + chunk]
        rate = datum.rate(c[:, 0, None] + ox, c[:, 1, None] + oy)
        f[k0:k0 + chunk] = np.einsum("kpn,p->kn", datum.size_average(rate, grid), w2)
    return State(f, mesh, grid)


def point_sample(datum: ExponentialDatum, grid: SizeGrid, mesh: SpatialMesh) -> State:
    """Initial state sampled at cell centers ``(x_K, y_i)``."""
    rate = datum.rate(mesh.centers[:, 0], mesh.centers[:, 1])[:, None]
    with np.errstate(invalid="ignore"):
        f = np.exp(-rate * grid.centers)
    return State(np.nan_to_num(f, nan=0.0), mesh, grid)


def channel_profile(field: CosineField) -> BoundaryProfile:
    """Dirichlet data ``exp(-y / alpha(x))``; use ``k1 = 0`` for a profile in x2 only."""

    def fn(x1, x2, y):
        a = field(x1, x2)
        if a <= 0:
            return np.zeros_like(y)
        return np.exp(-y / a)

    return BoundaryProfile(f"exp-scale[{field.mean},{field.amp},{field.k2}]", fn)
