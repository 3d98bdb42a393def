"""Admissible finite-volume meshes with two-point transmissibilities."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .size_grid import SizeGrid

logger = logging.getLogger(__name__)

Selector = Callable[[np.ndarray, np.ndarray], "np.ndarray | bool"]


@dataclass(frozen=True, eq=False)
class BoundaryProfile:
    """Prescribed boundary density ``g(x, y)`` for Dirichlet edges.

    ``fn(x1, x2, y)`` receives the edge midpoint coordinates and the size
    cell centers and must return a nonnegative array shaped like ``y``.
    """

    identifier: str
    fn: Callable[[float, float, np.ndarray], np.ndarray]

    def values(self, midpoint: Sequence[float], y: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            g = np.asarray(self.fn(float(midpoint[0]), float(midpoint[1]), y), dtype=float)
        g = np.broadcast_to(g, np.shape(y))
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ConfigurationError(
                f"boundary profile {self.identifier!r} gives negative or non-finite "
                f"values at {tuple(midpoint)}"
            )
        return g


@dataclass(frozen=True)
class CartesianLayout:
    x_extent: tuple[float, float]
    y_extent: tuple[float, float]
    nx: int
    ny: int

    @property
    def hx(self) -> float:
        return (self.x_extent[1] - self.x_extent[0]) / self.nx

    @property
    def hy(self) -> float:
        return (self.y_extent[1] - self.y_extent[0]) / self.ny


@dataclass(frozen=True, eq=False)
class SpatialMesh:
    """Control volumes, interior edges and boundary edges of a 2-D mesh.

    Stored as parallel arrays. Interior edge ``e`` joins cells
    ``left[e]`` and ``right[e]``; ``dist_left[e]``/``dist_right[e]`` are the
    distances from each center to the edge and ``center_dist[e]`` the
    distance between the centers. Boundary edge ``s`` belongs to
    ``bcell[s]``; ``profiles[s]`` is ``None`` for homogeneous Neumann.
    """

    measure: np.ndarray
    centers: np.ndarray
    left: np.ndarray
    right: np.ndarray
    length: np.ndarray
    center_dist: np.ndarray
    dist_left: np.ndarray
    dist_right: np.ndarray
    midpoint: np.ndarray
    bcell: np.ndarray
    blength: np.ndarray
    bdist: np.ndarray
    bmidpoint: np.ndarray
    profiles: tuple[Optional[BoundaryProfile], ...]
    domain_area: float
    cartesian: Optional[CartesianLayout] = None
    _dirichlet_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.measure.shape[0]
        if n == 0:
            raise ConfigurationError("mesh has no cells")
        if np.any(~np.isfinite(self.measure)) or np.any(self.measure <= 0):
            raise ConfigurationError("cell measures must be positive and finite")
        total = float(np.sum(self.measure))
        if abs(total - self.domain_area) > 1e-12 * self.domain_area:
            raise ConfigurationError(
                f"cell measures sum to {total!r}, domain area is {self.domain_area!r}"
            )
        for name in ("left", "right"):
            idx = getattr(self, name)
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise ConfigurationError(f"interior edge {name} index out of range")
        if np.any(self.left == self.right):
            raise ConfigurationError("interior edge joins a cell to itself")
        if self.bcell.size and (self.bcell.min() < 0 or self.bcell.max() >= n):
            raise ConfigurationError("boundary edge cell index out of range")
        if len(self.profiles) != self.bcell.shape[0]:
            raise ConfigurationError("one boundary condition per boundary edge required")
        for name, tau in (("interior", self.tau), ("boundary", self.btau)):
            if np.any(~np.isfinite(tau)) or np.any(tau <= 0):
                raise ConfigurationError(f"{name} transmissibilities must be positive and finite")

    @property
    def n_cells(self) -> int:
        return self.measure.shape[0]

    @cached_property
    def tau(self) -> np.ndarray:
        """Interior transmissibilities ``m(sigma) / d(x_K, x_L)``."""
        return self.length / self.center_dist

    @cached_property
    def btau(self) -> np.ndarray:
        """Boundary transmissibilities ``m(sigma) / d(x_K, sigma)``."""
        return self.blength / self.bdist

    @cached_property
    def dirichlet_mask(self) -> np.ndarray:
        return np.array([p is not None for p in self.profiles], dtype=bool)

    @property
    def all_neumann(self) -> bool:
        return not self.dirichlet_mask.any()

    @cached_property
    def adjacency(self):
        """Per-cell CSR view of the interior edges: ``(indptr, neighbor, tau)``.

        Each interior edge appears once from each side, which lets the
        diffusion sweep write every cell from exactly one place.
        """
        n = self.n_cells
        owner = np.concatenate([self.left, self.right])
        other = np.concatenate([self.right, self.left])
        tau = np.concatenate([self.tau, self.tau])
        order = np.argsort(owner, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, owner + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, other[order].astype(np.int64), np.ascontiguousarray(tau[order])

    @cached_property
    def dirichlet_adjacency(self):
        """Per-cell CSR view of the Dirichlet edges: ``(indptr, edge, tau)``."""
        n = self.n_cells
        edges = np.flatnonzero(self.dirichlet_mask)
        owner = self.bcell[edges]
        order = np.argsort(owner, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, owner + 1, 1)
        np.cumsum(indptr, out=indptr)
        edges = edges[order].astype(np.int64)
        return indptr, edges, np.ascontiguousarray(self.btau[edges])

    def dirichlet_values(self, grid: SizeGrid) -> np.ndarray:
        """Boundary data ``g[s, i]`` at edge midpoints and size centers (0 on Neumann edges)."""
        key = (grid.R, grid.n_size)
        cached = self._dirichlet_cache.get(key)
        if cached is None:
            cached = np.zeros((self.bcell.shape[0], grid.n_size))
            for s, prof in enumerate(self.profiles):
                if prof is not None:
                    cached[s] = prof.values(self.bmidpoint[s], grid.centers)
            cached.setflags(write=False)
            self._dirichlet_cache[key] = cached
        return cached


def build_cartesian_mesh(
    x_extent: tuple[float, float],
    y_extent: tuple[float, float],
    nx: int,
    ny: int,
) -> SpatialMesh:
    """Uniform ``nx`` by ``ny`` rectangle grid, all boundary edges Neumann.

    Cells are numbered row-major: cell ``r*nx + c`` sits in column ``c``
    (along x1) and row ``r`` (along x2).
    """
    x0, x1 = map(float, x_extent)
    y0, y1 = map(float, y_extent)
    if not (np.isfinite([x0, x1, y0, y1]).all() and x1 > x0 and y1 > y0):
        raise ConfigurationError(f"degenerate domain {x_extent} x {y_extent}")
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ConfigurationError(f"nx, ny must be positive integers, got {nx}, {ny}")
    nx, ny = int(nx), int(ny)
    layout = CartesianLayout((x0, x1), (y0, y1), nx, ny)
    hx, hy = layout.hx, layout.hy

    cols, rows = np.meshgrid(np.arange(nx), np.arange(ny))
    cols, rows = cols.ravel(), rows.ravel()
    centers = np.column_stack([x0 + (cols + 0.5) * hx, y0 + (rows + 0.5) * hy])
    measure = np.full(nx * ny, hx * hy)

    def cell(r, c):
        return r * nx + c

    # vertical edges (normal along x1), then horizontal edges (normal along x2)
    rv, cv = np.meshgrid(np.arange(ny), np.arange(nx - 1), indexing="ij")
    rv, cv = rv.ravel(), cv.ravel()
    rh, ch = np.meshgrid(np.arange(ny - 1), np.arange(nx), indexing="ij")
    rh, ch = rh.ravel(), ch.ravel()
    left = np.concatenate([cell(rv, cv), cell(rh, ch)]).astype(np.int64)
    right = np.concatenate([cell(rv, cv + 1), cell(rh + 1, ch)]).astype(np.int64)
    length = np.concatenate([np.full(rv.size, hy), np.full(rh.size, hx)])
    center_dist = np.concatenate([np.full(rv.size, hx), np.full(rh.size, hy)])
    half = 0.5 * center_dist
    midpoint = np.concatenate([
        np.column_stack([x0 + (cv + 1) * hx, y0 + (rv + 0.5) * hy]),
        np.column_stack([x0 + (ch + 0.5) * hx, y0 + (rh + 1) * hy]),
    ]).reshape(-1, 2)

    c_all, r_all = np.arange(nx), np.arange(ny)
    bottom = (cell(0, c_all), np.full(nx, hx), np.full(nx, 0.5 * hy),
              np.column_stack([x0 + (c_all + 0.5) * hx, np.full(nx, y0)]))
    right_w = (cell(r_all, nx - 1), np.full(ny, hy), np.full(ny, 0.5 * hx),
               np.column_stack([np.full(ny, x1), y0 + (r_all + 0.5) * hy]))
    top = (cell(ny - 1, c_all), np.full(nx, hx), np.full(nx, 0.5 * hy),
           np.column_stack([x0 + (c_all + 0.5) * hx, np.full(nx, y1)]))
    left_w = (cell(r_all, 0), np.full(ny, hy), np.full(ny, 0.5 * hx),
              np.column_stack([np.full(ny, x0), y0 + (r_all + 0.5) * hy]))
    sides = (bottom, right_w, top, left_w)
    bcell = np.concatenate([s[0] for s in sides]).astype(np.int64)
    blength = np.concatenate([s[1] for s in sides])
    bdist = np.concatenate([s[2] for s in sides])
    bmid = np.concatenate([s[3] for s in sides])

    return SpatialMesh(
        measure=measure,
        centers=centers,
        left=left,
        right=right,
        length=length,
        center_dist=center_dist,
        dist_left=half,
        dist_right=half.copy(),
        midpoint=midpoint,
        bcell=bcell,
        blength=blength,
        bdist=bdist,
        bmidpoint=bmid,
        profiles=(None,) * bcell.size,
        domain_area=(x1 - x0) * (y1 - y0),
        cartesian=layout,
    )


def tag_boundary(
    mesh: SpatialMesh, selector: Selector, profile: Optional[BoundaryProfile] = None
) -> SpatialMesh:
    """Retag the boundary edges whose midpoint satisfies ``selector``.

    ``profile=None`` sets homogeneous Neumann, a :class:`BoundaryProfile`
    sets Dirichlet data. ``selector(x1, x2)`` is called once on the arrays of
    boundary-edge midpoints. Unmatched edges keep their condition.
    """
    hit = np.broadcast_to(
        np.asarray(selector(mesh.bmidpoint[:, 0], mesh.bmidpoint[:, 1]), dtype=bool),
        mesh.bcell.shape,
    )
    logger.info("tag_boundary: %d of %d boundary edges matched", int(hit.sum()), hit.size)
    profiles = tuple(profile if h else p for h, p in zip(hit, mesh.profiles))
    return replace(mesh, profiles=profiles, _dirichlet_cache={})


def mesh_regularity(mesh: SpatialMesh) -> float:
    """Largest ``xi`` with ``d(x_K, sigma) >= xi * d(x_K, x_L)`` on every interior edge."""
    if mesh.left.size == 0:
        return 1.0
    ratios = np.minimum(mesh.dist_left, mesh.dist_right) / mesh.center_dist
    return float(min(1.0, ratios.min()))
