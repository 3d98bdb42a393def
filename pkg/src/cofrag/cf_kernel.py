"""Discrete coagulation-fragmentation operator on one spatial cell.

A *row* is the vector ``f[i]`` of densities over the size cells of one
spatial cell. The operator exists in two algebraically equivalent forms:
the conservative flux-divergence form (kept as a cross-check) and the
classical gain/loss form used by the time integrator.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .errors import ContractError
from .size_grid import KernelTables, SizeGrid

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-300


class FluxArrays(NamedTuple):
    """Size fluxes at the ``N+1`` cell interfaces; index ``k`` is interface ``k - 1/2``."""

    coag: np.ndarray
    frag: np.ndarray


@lru_cache(maxsize=16)
def _triangle(n: int):
    """Index pairs ``(i, l)`` with ``0 <= l <= i < n``, ordered by ``i``."""
    i, l = np.tril_indices(n)
    return i, l, i - l


@lru_cache(maxsize=16)
def _upper_offsets(n: int):
    """``(j, l, l - j)`` for ``0 <= j <= l < n``."""
    j, l = np.triu_indices(n)
    return j, l, l - j


def _interface_sums(terms: np.ndarray) -> np.ndarray:
    """``out[i+1] = sum_{j<=i<l} terms[j, l]`` with zero end values."""
    n = terms.shape[0]
    cum = np.cumsum(terms, axis=0)
    out = np.zeros(n + 1)
    out[1:] = np.sum(np.triu(cum, k=1), axis=1)
    out[n] = 0.0
    return out


def coag_flux(row: np.ndarray, tables: KernelTables, grid: SizeGrid) -> np.ndarray:
    f = np.asarray(row, dtype=float)
    n = f.size
    j, l, off = _upper_offsets(n)
    terms = np.zeros((n, n))
    terms[j, l] = grid.edges[j] * tables.a[j, off] * f[j] * f[off]
    return grid.dy**2 * _interface_sums(terms)


def frag_flux(row: np.ndarray, tables: KernelTables, grid: SizeGrid) -> np.ndarray:
    f = np.asarray(row, dtype=float)
    n = f.size
    j, l, off = _upper_offsets(n)
    terms = np.zeros((n, n))
    terms[j, l] = grid.edges[j] * tables.b[j, off] * f[l]
    return grid.dy**2 * _interface_sums(terms)


def fluxes(row: np.ndarray, tables: KernelTables, grid: SizeGrid) -> FluxArrays:
    return FluxArrays(coag_flux(row, tables, grid), frag_flux(row, tables, grid))


def q_classical(f: np.ndarray, tables: KernelTables, grid: SizeGrid) -> np.ndarray:
    """Gain/loss form of the operator.

    Accepts a single row of shape ``(N,)`` or a stack of rows ``(n_cells, N)``
    and returns an array of the same shape.
    """
    f = np.asarray(f, dtype=float)
    rows = np.ascontiguousarray(np.atleast_2d(f))
    out = np.empty_like(rows)
    _kernels.q_classical_rows(rows, tables.a, tables.b, grid.dy, out)
    return out.reshape(f.shape)


def q_from_fluxes(
    coag: np.ndarray,
    frag: np.ndarray,
    grid: SizeGrid,
    row: Optional[np.ndarray] = None,
    tables: Optional[KernelTables] = None,
) -> np.ndarray:
    """Divided-difference form ``(-(C[i+1]-C[i]) + (F[i+1]-F[i])) / (i dy^2)``.

    The divisor vanishes in cell 0. When ``row`` and ``tables`` are given,
    entry 0 is taken from :func:`q_classical`; otherwise it is NaN.
    """
    coag = np.asarray(coag, dtype=float)
    frag = np.asarray(frag, dtype=float)
    n = grid.n_size
    if coag.shape != (n + 1,) or frag.shape != (n + 1,):
        raise ContractError(f"flux arrays must have length {n + 1}")
    q = np.empty(n)
    denom = grid.edges[1:n] * grid.dy
    q[1:] = (-(coag[2:] - coag[1:n]) + (frag[2:] - frag[1:n])) / denom
    if row is not None and tables is not None:
        q[0] = q_classical(row, tables, grid)[0]
    else:
        q[0] = np.nan
    return q


def weak_form(
    row: np.ndarray, tables: KernelTables, grid: SizeGrid, phi: np.ndarray
) -> float:
    """Double-sum side of the discrete weak formulation for test sequence ``phi``."""
    f = np.asarray(row, dtype=float)
    phi = np.asarray(phi, dtype=float)
    i, l, k = _triangle(f.size)
    net = tables.a[l, k] * f[l] * f[k] - tables.b[l, k] * f[i]
    return float(-0.5 * grid.dy**2 * np.sum(net * (phi[l] + phi[k] - phi[i])))


def _log_floor(x):
    return np.log(np.maximum(x, LOG_FLOOR))


def dissipation_rows(f: np.ndarray, tables: KernelTables, grid: SizeGrid):
    """Per-row entropy dissipation and the number of clamped terms.

    Returns ``(values, n_clamped)`` for a stack ``f`` of shape ``(n_rows, N)``.
    A term with ``p == q`` contributes 0; if exactly one of ``p``, ``q`` is
    zero the logarithm is floored at :data:`LOG_FLOOR` and the term counted.
    """
    f = np.atleast_2d(np.asarray(f, dtype=float))
    i, l, k = _triangle(f.shape[1])
    p = tables.a[l, k] * f[:, l] * f[:, k]
    q = tables.b[l, k] * f[:, i]
    one_zero = (p == 0) ^ (q == 0)
    terms = np.where(p == q, 0.0, (p - q) * (_log_floor(p) - _log_floor(q)))
    n_clamped = int(np.count_nonzero(one_zero))
    if n_clamped:
        logger.debug("dissipation: %d terms with one vanishing side", n_clamped)
    return 0.5 * grid.dy**2 * terms.sum(axis=1), n_clamped


def dissipation(
    row: np.ndarray, tables: KernelTables, grid: SizeGrid, return_clamped: bool = False
):
    values, n_clamped = dissipation_rows(row, tables, grid)
    value = float(values[0])
    return (value, n_clamped) if return_clamped else value
