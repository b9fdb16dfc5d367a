"""Monte Carlo scoring kernels.

Each kernel has a numba ``@njit`` version and a pure NumPy version with the
same signature. The numba path is used when numba imports, the environment
variable ``GRIDSTEALTH_DISABLE_NUMBA`` is unset or ``0``, and the
measurement dimension is at most ``NUMBA_MAX_DIM``; above that the
BLAS-backed NumPy path is faster (see ``benchmarks/bench_kernels.py``).
Results from the two paths agree to floating-point round-off, not bitwise.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("GRIDSTEALTH_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
except ImportError:
    njit = None

USE_NUMBA = njit is not None
NUMBA_MAX_DIM = 8


def row_quad_forms_numpy(y: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``out[r] = y[r] @ q @ y[r]``."""
    return np.einsum("ij,ij->i", y @ q, y)


def block_quad_sums_numpy(y: np.ndarray, q: np.ndarray, block: int) -> np.ndarray:
    """Sum of row quadratic forms over consecutive groups of ``block`` rows."""
    return row_quad_forms_numpy(y, q).reshape(-1, block).sum(axis=1)


if USE_NUMBA:

    @njit(cache=True)
    def row_quad_forms_numba(y, q):
        n, m = y.shape
        out = np.empty(n)
        for r in range(n):
            acc = 0.0
            for i in range(m):
                s = 0.0
                for j in range(m):
                    s += q[i, j] * y[r, j]
                acc += y[r, i] * s
            out[r] = acc
        return out

    @njit(cache=True)
    def block_quad_sums_numba(y, q, block):
        n, m = y.shape
        nb = n // block
        out = np.zeros(nb)
        for b in range(nb):
            tot = 0.0
            for r in range(b * block, (b + 1) * block):
                acc = 0.0
                for i in range(m):
                    s = 0.0
                    for j in range(m):
                        s += q[i, j] * y[r, j]
                    acc += y[r, i] * s
                tot += acc
            out[b] = tot
        return out


def _use_numba(q: np.ndarray) -> bool:
    return USE_NUMBA and q.shape[0] <= NUMBA_MAX_DIM


def row_quad_forms(y: np.ndarray, q: np.ndarray) -> np.ndarray:
    if _use_numba(q):
        return row_quad_forms_numba(y, q)
    return row_quad_forms_numpy(y, q)


def block_quad_sums(y: np.ndarray, q: np.ndarray, block: int) -> np.ndarray:
    if _use_numba(q):
        return block_quad_sums_numba(y, q, block)
    return block_quad_sums_numpy(y, q, block)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
