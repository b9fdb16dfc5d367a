"""Small Cholesky-based helpers shared by the attack and detection code."""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky

from .errors import NumericalError


def cholesky_lower(a: np.ndarray, what: str = "matrix must be positive definite") -> np.ndarray:
    try:
        return cholesky(a, lower=True, check_finite=True)
    except (LinAlgError, ValueError):
        raise NumericalError(what) from None


def logdet_from_chol(c: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def logdet_pd(a: np.ndarray) -> float:
    return logdet_from_chol(cholesky_lower(a))


def solve_chol(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cho_solve((c, True), b, check_finite=False)


def inv_pd(a: np.ndarray) -> np.ndarray:
    c = cholesky_lower(a)
    inv = solve_chol(c, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)
