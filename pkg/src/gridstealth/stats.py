"""Covariance models, SNR bookkeeping, seeded sampling and the sample covariance.

Random numbers
--------------
Every stream is a NumPy ``Generator`` over ``PCG64`` seeded through
``SeedSequence``; standard normals come from ``Generator.standard_normal``
(ziggurat). A task with index ``i`` under base seed ``s`` uses seed
``(s + i) mod 2**64``. Distinct streams within one task append an integer
stream tag to the seed entropy (see :func:`make_rng`).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import toeplitz

from .dc_model import Jacobian
from .errors import ParameterError, ShapeError

SYM_TOL = 1e-10
PSD_RTOL = 1e-9
_U64 = 2**64


def derive_seed(seed: int, index: int) -> int:
    return (int(seed) + int(index)) % _U64


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed``; ``stream`` tags select independent sub-streams."""
    seed = int(seed) % _U64
    entropy = [seed, *stream] if stream else seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def check_covariance(a, name: str = "covariance", dim: int | None = None) -> np.ndarray:
    """Validate a symmetric PSD matrix and return it as a float array.

    Eigenvalues down to ``-1e-9 * ||a||_2`` are accepted as round-off. The
    entries are returned unmodified; clamping happens only where a square
    root is taken (:func:`covariance_sqrt`).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"shape error: {name} must be square, got {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ShapeError(f"shape error: {name} must be {dim}x{dim}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > SYM_TOL * scale:
        raise ParameterError(f"{name} is not symmetric")
    w = np.linalg.eigvalsh(a)
    if w.size and w[0] < -PSD_RTOL * max(abs(w[-1]), abs(w[0])):
        raise ParameterError(f"{name} is not positive semi-definite (min eigenvalue {w[0]:.3e})")
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def covariance_sqrt(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigendecomposition.

    Eigenvalues within round-off of zero (``n * eps * max|w|``), including
    slightly negative ones, are clamped to 0 so singular covariances keep
    their null space.
    """
    w, v = np.linalg.eigh(cov)
    cutoff = w.size * np.finfo(float).eps * np.abs(w).max(initial=0.0)
    w = np.where(w > cutoff, w, 0.0)
    return (v * np.sqrt(w)) @ v.T


def toeplitz_covariance(n: int, rho: float) -> np.ndarray:
    """Exponential-decay Toeplitz covariance ``s_ij = rho**|i-j|``."""
    if n < 1:
        raise ParameterError("dimension must be positive")
    if not 0.0 <= rho < 1.0:
        raise ParameterError(f"invalid correlation strength: rho={rho} not in [0, 1)")
    return toeplitz(float(rho) ** np.arange(n))


def _matrix_of(H) -> np.ndarray:
    if isinstance(H, Jacobian):
        return H.matrix
    return np.atleast_2d(np.asarray(H, dtype=float))


@dataclass(frozen=True, eq=False)
class ObservationModel:
    """``Y = H X + Z`` with ``X ~ N(0, sigma_xx)`` and ``Z ~ N(0, sigma_sq I)``.

    ``H`` may be a :class:`Jacobian` or a bare matrix.
    """

    H: np.ndarray
    sigma_xx: np.ndarray
    sigma_sq: float
    jacobian: Jacobian | None = None

    def __post_init__(self):
        if isinstance(self.H, Jacobian):
            object.__setattr__(self, "jacobian", self.H)
        object.__setattr__(self, "H", _matrix_of(self.H))
        if not (np.isfinite(self.sigma_sq) and self.sigma_sq > 0):
            raise ParameterError(f"noise variance must be positive, got {self.sigma_sq}")
        object.__setattr__(self, "sigma_sq", float(self.sigma_sq))
        object.__setattr__(
            self, "sigma_xx", check_covariance(self.sigma_xx, "sigma_xx", self.H.shape[1])
        )

    @classmethod
    def toeplitz(cls, H, rho: float, snr_db: float) -> "ObservationModel":
        """Model with a Toeplitz state prior and noise set to hit ``snr_db``."""
        n = _matrix_of(H).shape[1]
        sxx = toeplitz_covariance(n, rho)
        return cls(H, sxx, noise_variance_for_snr(H, sxx, snr_db))

    @property
    def M(self) -> int:
        return self.H.shape[0]

    @property
    def N(self) -> int:
        return self.H.shape[1]

    @cached_property
    def signal_covariance(self) -> np.ndarray:
        """``H sigma_xx H^T``, symmetrized."""
        return symmetrize(self.H @ self.sigma_xx @ self.H.T)


def measurement_covariance(model: ObservationModel, sigma_aa=None) -> np.ndarray:
    """``H sigma_xx H^T + sigma^2 I`` plus the attack covariance when given."""
    out = model.signal_covariance + model.sigma_sq * np.eye(model.M)
    if sigma_aa is not None:
        sigma_aa = np.atleast_2d(np.asarray(getattr(sigma_aa, "sigma_aa", sigma_aa), dtype=float))
        if sigma_aa.shape != (model.M, model.M):
            raise ShapeError(
                f"shape error: attack covariance must be {model.M}x{model.M}, got {sigma_aa.shape}"
            )
        out = out + sigma_aa
    return out


def snr_db(model: ObservationModel) -> float:
    return 10.0 * np.log10(np.trace(model.signal_covariance) / (model.M * model.sigma_sq))


def noise_variance_for_snr(H, sigma_xx, snr_db: float) -> float:
    H = _matrix_of(H)
    signal = float(np.trace(H @ np.asarray(sigma_xx, dtype=float) @ H.T))
    if not signal > 0:
        raise ParameterError("degenerate signal: tr(H sigma_xx H^T) must be positive")
    return signal / (H.shape[0] * 10.0 ** (snr_db / 10.0))


@dataclass(frozen=True, eq=False)
class StateSampleSet:
    samples: np.ndarray  # shape (K, N), one realization per row

    @property
    def K(self) -> int:
        return self.samples.shape[0]

    @property
    def N(self) -> int:
        return self.samples.shape[1]


def gaussian_rows(root: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` rows ``z @ root`` with ``z`` standard normal, filled row by row in index order."""
    z = rng.standard_normal((k, root.shape[0]))
    return z @ root


def sample_gaussian(cov, k: int, seed: int) -> StateSampleSet:
    """``k`` i.i.d. draws from ``N(0, cov)``, reproducible from ``seed``.

    Uses the eigendecomposition square root so singular covariances are fine.
    """
    if k < 1:
        raise ParameterError("sample count must be positive")
    cov = check_covariance(cov)
    return StateSampleSet(gaussian_rows(covariance_sqrt(cov), k, make_rng(seed)))


def sample_covariance(samples: StateSampleSet | np.ndarray) -> np.ndarray:
    """``(1/(K-1)) sum_i x_i x_i^T`` with no mean removal (the prior mean is zero)."""
    x = samples.samples if isinstance(samples, StateSampleSet) else np.atleast_2d(samples)
    k = x.shape[0]
    if k < 2:
        raise ParameterError(f"insufficient samples: K={k}, need at least 2")
    return symmetrize(x.T @ x) / (k - 1)
