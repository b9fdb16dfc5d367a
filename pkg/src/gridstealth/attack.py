"""Stealth utility of Gaussian attacks and the attack constructions.

All information quantities are in nats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import NumericalError, ParameterError, ShapeError
from .linalg import cholesky_lower, inv_pd, logdet_from_chol, logdet_pd, solve_chol
from .stats import (
    ObservationModel,
    check_covariance,
    covariance_sqrt,
    derive_seed,
    gaussian_rows,
    make_rng,
    measurement_covariance,
    sample_covariance,
    symmetrize,
)

IDENTITY_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class AttackCovariance:
    sigma_aa: np.ndarray
    provenance: Literal["optimal", "from_samples", "custom"] = "custom"
    k: int | None = None
    seed: int | None = None

    @property
    def dim(self) -> int:
        return self.sigma_aa.shape[0]


@dataclass(frozen=True)
class UtilityBreakdown:
    mutual_information: float
    kl_divergence: float
    total: float


def _attack_matrix(model: ObservationModel, attack) -> np.ndarray:
    a = attack.sigma_aa if isinstance(attack, AttackCovariance) else attack
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape != (model.M, model.M):
        raise ShapeError(f"shape error: attack covariance must be {model.M}x{model.M}, got {a.shape}")
    return a


def custom_attack(model: ObservationModel, sigma_aa) -> AttackCovariance:
    a = check_covariance(_attack_matrix(model, sigma_aa), "attack covariance", model.M)
    return AttackCovariance(a, "custom")


def kl_gaussian(sigma0, sigma1) -> float:
    """``D(N(0, sigma0) || N(0, sigma1))`` in nats.

    ``sigma1`` must be positive definite. A singular ``sigma0`` gives ``inf``.
    """
    s0 = np.atleast_2d(np.asarray(sigma0, dtype=float))
    s1 = np.atleast_2d(np.asarray(sigma1, dtype=float))
    if s0.shape != s1.shape or s0.shape[0] != s0.shape[1]:
        raise ShapeError(f"shape error: {s0.shape} vs {s1.shape}")
    m = s0.shape[0]
    c1 = cholesky_lower(s1, "second argument must be positive definite")
    if np.array_equal(s0, s1):
        return 0.0
    try:
        logdet0 = logdet_pd(s0)
    except NumericalError:
        return math.inf
    trace = float(np.trace(solve_chol(c1, s0)))
    d = 0.5 * (logdet_from_chol(c1) - logdet0 - m + trace)
    return max(d, 0.0)


def optimal_attack(model: ObservationModel) -> AttackCovariance:
    """The minimizer of the stealth utility: ``H sigma_xx H^T``."""
    return AttackCovariance(model.signal_covariance, "optimal")


def attack_from_samples(model: ObservationModel, s_xx, k: int | None = None,
                        seed: int | None = None) -> AttackCovariance:
    """Plug-in attack ``H s_xx H^T`` built from an estimated state covariance."""
    s_xx = check_covariance(s_xx, "s_xx", model.N)
    return AttackCovariance(symmetrize(model.H @ s_xx @ model.H.T), "from_samples", k, seed)


def mutual_information(model: ObservationModel, attack) -> float:
    """``I(X; Y_A) = 1/2 (log|Sigma_YAYA| - log|Sigma_AA + sigma^2 I|)``."""
    a = _attack_matrix(model, attack)
    noise = a + model.sigma_sq * np.eye(model.M)
    total = measurement_covariance(model, a)
    return max(0.5 * (logdet_pd(total) - logdet_pd(noise)), 0.0)


def stealth_utility(model: ObservationModel, attack) -> UtilityBreakdown:
    """Mutual information leaked plus KL detectability of the attacked measurements.

    The total is checked against the closed form
    ``1/2 (log|Sigma_YY| - log|Sigma_AA + sigma^2 I| + tr(Sigma_YY^-1 Sigma_AA))``.
    """
    a = _attack_matrix(model, attack)
    syy = measurement_covariance(model)
    mi = mutual_information(model, a)
    kl = kl_gaussian(measurement_covariance(model, a), syy)
    total = mi + kl

    c_yy = cholesky_lower(syy)
    closed = 0.5 * (
        logdet_from_chol(c_yy)
        - logdet_pd(a + model.sigma_sq * np.eye(model.M))
        + float(np.trace(solve_chol(c_yy, a)))
    )
    if not math.isclose(total, closed, rel_tol=IDENTITY_RTOL, abs_tol=1e-12):
        raise NumericalError(f"utility decomposition mismatch: {total!r} vs closed form {closed!r}")
    return UtilityBreakdown(mi, kl, total)


def reduced_objective(model: ObservationModel, attack) -> float:
    """``tr(Sigma_YY^-1 Sigma_AA) - log|Sigma_AA + sigma^2 I|``; twice the utility minus ``log|Sigma_YY|``."""
    a = _attack_matrix(model, attack)
    c_yy = cholesky_lower(measurement_covariance(model))
    return float(np.trace(solve_chol(c_yy, a))) - logdet_pd(a + model.sigma_sq * np.eye(model.M))


def optimal_utility_closed_form(model: ObservationModel) -> float:
    """Utility at the optimum, ``1/2 (M - sigma^2 tr(Sigma_YY^-1))``."""
    syy_inv = inv_pd(measurement_covariance(model))
    return 0.5 * (model.M - model.sigma_sq * float(np.trace(syy_inv)))


def stationarity_residual(model: ObservationModel, attack) -> float:
    """``||Sigma_YY^-1 - (Sigma_AA + sigma^2 I)^-1||_F``; zero only at the optimum."""
    a = _attack_matrix(model, attack)
    diff = inv_pd(measurement_covariance(model)) - inv_pd(a + model.sigma_sq * np.eye(model.M))
    return float(np.linalg.norm(diff, "fro"))


def conditional_divergence_mc(model: ObservationModel, k: int, trials: int,
                              seed: int) -> tuple[float, list[float]]:
    """Average utility of sample-covariance attacks over independent training sets.

    Trial ``t`` draws ``k`` state realizations from ``N(0, sigma_xx)`` with seed
    ``seed + t``. Because trials share seeds across ``k``, the training set for a
    smaller ``k`` is a prefix of the one for a larger ``k``.
    """
    if k < 2:
        raise ParameterError(f"insufficient samples: K={k}, need at least 2")
    if k < model.N:
        raise ParameterError(f"K={k} is below the state dimension N={model.N}")
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    root = covariance_sqrt(model.sigma_xx)
    values = []
    for t in range(trials):
        s = derive_seed(seed, t)
        # same draws as sample_gaussian(model.sigma_xx, k, s), root computed once
        s_xx = sample_covariance(gaussian_rows(root, k, make_rng(s)))
        values.append(stealth_utility(model, attack_from_samples(model, s_xx, k, s)).total)
    return float(np.mean(values)), values


def normalized_frobenius_gap(reference, estimate) -> float:
    """``||reference - estimate||_F / ||reference||_F``."""
    ref = np.atleast_2d(np.asarray(getattr(reference, "sigma_aa", reference), dtype=float))
    est = np.atleast_2d(np.asarray(getattr(estimate, "sigma_aa", estimate), dtype=float))
    if ref.shape != est.shape:
        raise ShapeError(f"shape error: {ref.shape} vs {est.shape}")
    norm = np.linalg.norm(ref, "fro")
    if norm == 0:
        raise NumericalError("undefined normalization: reference has zero norm")
    return float(np.linalg.norm(ref - est, "fro") / norm)


def equal_trace_attack(model: ObservationModel) -> AttackCovariance:
    """Isotropic attack with the same total power as the optimal one (a naive baseline)."""
    power = float(np.trace(model.signal_covariance)) / model.M
    return AttackCovariance(power * np.eye(model.M), "custom")
