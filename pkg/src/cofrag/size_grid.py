"""Uniform size mesh on (0, R) and the rate tables evaluated on it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError

RateFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
DiffusionFn = Callable[[np.ndarray], np.ndarray]

_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SizeGrid:
    """Partition of (0, R) into ``n_size`` cells of width ``dy``.

    ``edges[i]`` is the left edge ``i*dy`` of cell ``i`` (so ``edges[0] == 0``),
    ``centers[i]`` its midpoint ``(i + 1/2)*dy``.
    """

    R: float
    n_size: int
    dy: float
    edges: np.ndarray = field(repr=False)
    centers: np.ndarray = field(repr=False)

    @property
    def left_edges(self) -> np.ndarray:
        """Left edge of every cell: the volume weight of the scheme."""
        return self.edges[:-1]


def build_size_grid(R: float, n_size: int) -> SizeGrid:
    if not np.isfinite(R) or R <= 0:
        raise ConfigurationError(f"truncation radius R must be positive, got {R!r}")
    if int(n_size) != n_size or n_size < 2:
        raise ConfigurationError(f"n_size must be an integer >= 2, got {n_size!r}")
    n_size = int(n_size)
    dy = R / n_size
    idx = np.arange(n_size + 1, dtype=float)
    edges = idx * dy
    edges[-1] = float(R)
    centers = (idx[:-1] + 0.5) * dy
    edges.setflags(write=False)
    centers.setflags(write=False)
    return SizeGrid(R=float(R), n_size=n_size, dy=dy, edges=edges, centers=centers)


@dataclass(frozen=True)
class KernelTables:
    """Coagulation rates ``a``, fragmentation rates ``b`` and diffusion ``d``.

    ``a[i, j] = a(y_i, y_j)`` and ``b[i, j] = b(y_i, y_j)`` at cell centers.
    ``d[i]`` is the diffusion coefficient of size cell ``i``.
    """

    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=float)
        b = np.ascontiguousarray(self.b, dtype=float)
        d = np.ascontiguousarray(self.d, dtype=float)
        n = d.shape[0]
        if d.ndim != 1 or a.shape != (n, n) or b.shape != (n, n):
            raise ConfigurationError(
                f"table shapes disagree: a{a.shape}, b{b.shape}, d{d.shape}"
            )
        for name, arr in (("a", a), ("b", b), ("d", d)):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ConfigurationError(f"table {name} has negative or non-finite entries")
        for name, arr in (("a", a), ("b", b)):
            if not np.array_equal(arr, arr.T):
                raise ConfigurationError(f"table {name} is not symmetric")
        for arr in (a, b, d):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @property
    def n_size(self) -> int:
        return self.d.shape[0]


def _symmetrized(values: np.ndarray, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values) | (values < 0)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ConfigurationError(
            f"rate {name}({i},{j}) = {values[i, j]!r} is negative or non-finite"
        )
    scale = np.max(np.abs(values)) if values.size else 0.0
    asym = np.max(np.abs(values - values.T)) if values.size else 0.0
    if asym > _SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        i, j = np.unravel_index(np.argmax(np.abs(values - values.T)), values.shape)
        raise ConfigurationError(
            f"rate {name} is not symmetric: |{name}({i},{j}) - {name}({j},{i})| = {asym:.3g}"
        )
    return 0.5 * (values + values.T)


def build_kernel_tables(
    grid: SizeGrid, a_fn: RateFn, b_fn: RateFn, d_fn: DiffusionFn
) -> KernelTables:
    """Evaluate the rate functions on ``grid``.

    ``a_fn`` and ``b_fn`` are called once with broadcast center arrays of shape
    ``(N, 1)`` and ``(1, N)``; ``d_fn`` with the diffusion sample points. Cell
    ``i >= 1`` samples diffusion at its left edge ``i*dy``; cell 0 at ``dy/2``
    so that ``d`` is never evaluated at zero size.
    """
    yi = grid.centers[:, None]
    yj = grid.centers[None, :]
    n = grid.n_size
    a = np.broadcast_to(np.asarray(a_fn(yi, yj), dtype=float), (n, n))
    b = np.broadcast_to(np.asarray(b_fn(yi, yj), dtype=float), (n, n))
    a = _symmetrized(a, "a")
    b = _symmetrized(b, "b")

    sample = grid.edges[:-1].copy()
    sample[0] = 0.5 * grid.dy
    d = np.broadcast_to(np.asarray(d_fn(sample), dtype=float), (n,)).copy()
    bad = ~np.isfinite(d) | (d < 0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ConfigurationError(f"diffusion d({sample[i]:g}) = {d[i]!r} at size cell {i}")
    return KernelTables(a=a, b=b, d=d)


def constant_rate(value: float = 1.0) -> RateFn:
    def rate(y, yp):
        return np.full(np.broadcast(y, yp).shape, float(value))

    return rate


def product_sqrt_rate(scale: float = 1.0) -> RateFn:
    def rate(y, yp):
        return scale * np.sqrt(y * yp)

    return rate


def constant_diffusion(value: float) -> DiffusionFn:
    def diffusion(y):
        return np.full(np.shape(y), float(value))

    return diffusion


def inverse_linear_diffusion(scale: float) -> DiffusionFn:
    """``d(y) = scale / (1 + y)``."""

    def diffusion(y):
        return scale / (1.0 + np.asarray(y, dtype=float))

    return diffusion
