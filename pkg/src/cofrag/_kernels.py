"""Compiled inner loops. Every output slot is written by exactly one iteration
of the outer ``prange``, so results do not depend on the thread count."""

import os

import numba
from numba import njit, prange

numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def configure_threads() -> int:
    """Apply the ``COFRAG_THREADS`` cap (0 or unset = all available)."""
    raw = os.environ.get("COFRAG_THREADS", "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        requested = 0
    available = numba.config.NUMBA_NUM_THREADS
    n = available if requested <= 0 else min(requested, available)
    numba.set_num_threads(n)
    return n


@njit(parallel=True, cache=True)
def q_classical_rows(f, a, b, dy, out):
    n_rows, n = f.shape
    for k in prange(n_rows):
        for i in range(n):
            fi = f[k, i]
            gain = 0.0
            for j in range(i + 1):
                gain += a[j, i - j] * f[k, j] * f[k, i - j] - b[j, i - j] * fi
            loss = 0.0
            for j in range(i, n):
                loss += a[i, j - i] * fi * f[k, j - i] - b[i, j - i] * f[k, j]
            out[k, i] = dy * (0.5 * gain - loss)


@njit(parallel=True, cache=True)
def diffusion_sweep(f, d, indptr, neighbor, tau, bindptr, bedge, btau, g, out):
    n_cells, n = f.shape
    for K in prange(n_cells):
        for i in range(n):
            out[K, i] = 0.0
        for e in range(indptr[K], indptr[K + 1]):
            L = neighbor[e]
            t = tau[e]
            for i in range(n):
                out[K, i] += t * (f[L, i] - f[K, i])
        for e in range(bindptr[K], bindptr[K + 1]):
            s = bedge[e]
            t = btau[e]
            for i in range(n):
                out[K, i] += t * (g[s, i] - f[K, i])
        for i in range(n):
            out[K, i] *= d[i]
