"""Likelihood-ratio attack detector and its Monte Carlo error rates.

Decision rule: declare an attack when ``log L(y) > log_tau``; on
``log L(y) == log_tau`` declare an attack with weight ``tie_weight``
(a randomized Neyman-Pearson test, counted in expectation so results stay
deterministic). ``alpha`` is the false-alarm rate on clean data and ``beta``
the missed-detection rate on attacked data.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .attack import AttackCovariance, kl_gaussian
from .errors import NumericalError, ParameterError, ShapeError
from .linalg import cholesky_lower, inv_pd, logdet_from_chol
from .stats import (
    ObservationModel,
    covariance_sqrt,
    derive_seed,
    gaussian_rows,
    make_rng,
    measurement_covariance,
)

STREAM_CLEAN = 0
STREAM_ATTACKED = 1
CHUNK_ROWS = 1 << 18


class InsufficientResolution(NumericalError):
    def __init__(self, message: str, n_mc_needed: int):
        super().__init__(message)
        self.n_mc_needed = n_mc_needed


@dataclass(frozen=True, eq=False)
class LrtDetector:
    sigma_clean: np.ndarray
    sigma_attacked: np.ndarray
    log_tau: float = 0.0
    tie_weight: float = 1.0
    _q: np.ndarray = field(init=False, repr=False)
    _const: float = field(init=False, repr=False)

    def __post_init__(self):
        clean = np.atleast_2d(np.asarray(self.sigma_clean, dtype=float))
        attacked = np.atleast_2d(np.asarray(self.sigma_attacked, dtype=float))
        if clean.shape != attacked.shape or clean.shape[0] != clean.shape[1]:
            raise ShapeError(f"shape error: {clean.shape} vs {attacked.shape}")
        c0 = cholesky_lower(clean, "clean covariance must be positive definite")
        c1 = cholesky_lower(attacked, "attacked covariance must be positive definite")
        object.__setattr__(self, "sigma_clean", clean)
        object.__setattr__(self, "sigma_attacked", attacked)
        object.__setattr__(self, "_q", np.ascontiguousarray(inv_pd(clean) - inv_pd(attacked)))
        object.__setattr__(self, "_const", logdet_from_chol(c0) - logdet_from_chol(c1))

    @classmethod
    def for_attack(cls, model: ObservationModel, attack) -> "LrtDetector":
        a = getattr(attack, "sigma_aa", attack)
        return cls(measurement_covariance(model), measurement_covariance(model, a))

    @property
    def dim(self) -> int:
        return self.sigma_clean.shape[0]


@dataclass(frozen=True)
class DetectionReport:
    alpha_hat: float
    beta_hat: float
    n_mc: int
    exponent_hat: float  # -(1/n) ln beta_hat, nan when beta_hat == 0
    block: int = 1


def log_lrt(detector: LrtDetector, y) -> float | np.ndarray:
    """``log f_attacked(y) - log f_clean(y)`` for one vector or a batch of rows."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y2 = np.ascontiguousarray(np.atleast_2d(y))
    if y2.shape[1] != detector.dim:
        raise ShapeError(f"shape error: measurement length {y2.shape[1]} != {detector.dim}")
    out = 0.5 * (_kernels.row_quad_forms(y2, detector._q) + detector._const)
    return float(out[0]) if single else out


def _block_statistics(detector: LrtDetector, cov: np.ndarray, n_blocks: int, block: int,
                      seed: int, stream: int) -> np.ndarray:
    """Summed log-LRT over ``n_blocks`` blocks of ``block`` i.i.d. draws from ``N(0, cov)``.

    Draws are generated in chunks; chunk ``c`` uses seed ``seed + c`` on ``stream``.
    """
    root = covariance_sqrt(cov)
    per_chunk = max(1, CHUNK_ROWS // block)
    out = np.empty(n_blocks)
    for c, start in enumerate(range(0, n_blocks, per_chunk)):
        nb = min(per_chunk, n_blocks - start)
        y = gaussian_rows(root, nb * block, make_rng(derive_seed(seed, c), stream))
        q = _kernels.block_quad_sums(np.ascontiguousarray(y), detector._q, block)
        out[start:start + nb] = 0.5 * (q + block * detector._const)
    return out


def error_rates(t_clean: np.ndarray, t_attacked: np.ndarray, log_tau: float,
                tie_weight: float = 1.0) -> tuple[float, float]:
    """(alpha_hat, beta_hat) for precomputed statistics under the randomized rule."""
    alpha = np.mean(t_clean > log_tau) + tie_weight * np.mean(t_clean == log_tau)
    beta = np.mean(t_attacked < log_tau) + (1.0 - tie_weight) * np.mean(t_attacked == log_tau)
    return float(alpha), float(beta)


def _threshold(stats: np.ndarray, alpha: float) -> tuple[float, float]:
    n = stats.size
    ordered = np.sort(stats)
    m = max(1, math.ceil(n * alpha))
    tau = float(ordered[n - m])
    above = int(np.count_nonzero(stats > tau))
    ties = int(np.count_nonzero(stats == tau))
    weight = min(1.0, max(0.0, (n * alpha - above) / ties))
    return tau, weight


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 0.5:
        raise ParameterError(f"invalid alpha: {alpha} not in (0, 0.5)")


def calibrate_threshold(detector: LrtDetector, alpha_target: float, n_mc: int, seed: int,
                        block: int = 1) -> LrtDetector:
    """Detector with ``log_tau`` at the empirical ``1 - alpha_target`` quantile under clean data.

    With ``block > 1`` the threshold applies to log-statistics summed over
    ``block`` i.i.d. measurement vectors.
    """
    _check_alpha(alpha_target)
    if n_mc < 1000:
        raise ParameterError(f"n_mc={n_mc} too small for calibration; need at least 1000")
    stats = _block_statistics(detector, detector.sigma_clean, n_mc, block, seed, STREAM_CLEAN)
    tau, weight = _threshold(stats, alpha_target)
    return dataclasses.replace(detector, log_tau=tau, tie_weight=weight)


def empirical_error_rates(detector: LrtDetector, n_mc: int, seed: int,
                          block: int = 1) -> DetectionReport:
    t0 = _block_statistics(detector, detector.sigma_clean, n_mc, block, seed, STREAM_CLEAN)
    t1 = _block_statistics(detector, detector.sigma_attacked, n_mc, block, seed, STREAM_ATTACKED)
    alpha, beta = error_rates(t0, t1, detector.log_tau, detector.tie_weight)
    exponent = -math.log(beta) / block if beta > 0 else math.nan
    return DetectionReport(alpha, beta, n_mc, exponent, block)


def stein_test(model: ObservationModel, attack, n_per_decision: int, alpha: float,
               n_mc: int, seed: int) -> DetectionReport:
    """Block LRT on ``n_per_decision`` vectors per decision, calibrated at ``alpha``.

    Calibration uses seed ``seed``; the error rates are estimated on fresh
    draws with seed ``seed + n_mc``.
    """
    if n_per_decision < 1:
        raise ParameterError("n_per_decision must be at least 1")
    _check_alpha(alpha)
    detector = LrtDetector.for_attack(model, attack)
    detector = calibrate_threshold(detector, alpha, n_mc, seed, block=n_per_decision)
    return empirical_error_rates(detector, n_mc, derive_seed(seed, n_mc), block=n_per_decision)


def stein_exponent(model: ObservationModel, attack, n_per_decision: int, alpha: float,
                   n_mc: int, seed: int) -> float:
    """``-(1/n) ln beta_n`` estimated by Monte Carlo.

    Raises :class:`InsufficientResolution` when no missed detection is observed.
    """
    report = stein_test(model, attack, n_per_decision, alpha, n_mc, seed)
    if report.beta_hat == 0.0:
        a = getattr(attack, "sigma_aa", attack)
        d = kl_gaussian(measurement_covariance(model, a), measurement_covariance(model))
        needed = int(min(10.0 * math.exp(min(n_per_decision * d, 700.0)), 1e300))
        raise InsufficientResolution(
            f"insufficient Monte Carlo resolution: no missed detections in {n_mc} blocks; "
            f"about {needed:.3g} blocks needed",
            needed,
        )
    return report.exponent_hat
