"""Parameter sweeps over (rho, SNR, K) that write one CSV per experiment.

Seeding uses common random numbers: every grid point starts from the
configured base seed, so trial ``t`` at any (rho, SNR, K) uses seed
``seed + t``. Outputs therefore do not depend on evaluation order or on
``jobs``; rows are sorted by key before writing.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import __version__, _kernels
from .attack import (
    AttackCovariance,
    attack_from_samples,
    conditional_divergence_mc,
    kl_gaussian,
    normalized_frobenius_gap,
    optimal_attack,
    stealth_utility,
)
from .cases import resolve_case
from .dc_model import Jacobian, build_jacobian
from .detection import InsufficientResolution, LrtDetector, calibrate_threshold, empirical_error_rates, stein_test
from .errors import ConfigError
from .stats import (
    ObservationModel,
    covariance_sqrt,
    derive_seed,
    gaussian_rows,
    make_rng,
    measurement_covariance,
    sample_covariance,
    toeplitz_covariance,
)

EXPERIMENTS = ("utility_vs_rho", "tradeoff", "training_utility", "frobenius_gap", "detection")

DENSE_RHO = tuple(round(0.05 * i, 2) for i in range(20)) + (0.99,)
TRAINING_RHO = (0.1, 0.8)
UTILITY_SNR = (0.0, 10.0, 20.0, 30.0)
TRAINING_SNR = (10.0, 20.0)
K_MULTIPLES = (1, 2, 4, 8, 16, 32)

COLUMNS = {
    "utility_vs_rho": ("experiment", "rho", "snr_db", "utility_nats"),
    "utility_vs_rho_max": ("experiment", "snr_db", "rho", "utility_nats"),
    "tradeoff": ("experiment", "rho", "snr_db", "mi_nats", "kl_nats"),
    "training_utility": ("experiment", "rho", "snr_db", "k", "mean_utility_nats", "utility_nats"),
    "frobenius_gap": ("experiment", "rho", "k", "frobenius_gap"),
    "detection": ("experiment", "rho", "snr_db", "attack", "block", "alpha_hat", "beta_hat",
                  "exponent_hat", "kl_nats"),
}
SORT_KEYS = {
    "utility_vs_rho": ("rho", "snr_db"),
    "utility_vs_rho_max": ("snr_db",),
    "tradeoff": ("rho", "snr_db"),
    "training_utility": ("rho", "snr_db", "k"),
    "frobenius_gap": ("rho", "k"),
    "detection": ("rho", "snr_db", "attack", "block"),
}


@dataclass
class ExperimentConfig:
    """Sweep settings. Grids left as ``None`` take per-experiment defaults."""

    case_path: str = "case30"
    experiments: tuple[str, ...] = EXPERIMENTS
    rho_grid: tuple[float, ...] | None = None
    snr_grid_db: tuple[float, ...] | None = None
    k_grid: tuple[int, ...] | None = None
    trials: int = 100
    alpha_target: float = 0.05
    seed: int = 0
    output_dir: str = "results"
    n_mc: int = 20000
    block_sizes: tuple[int, ...] = (1, 2)
    jobs: int = 1

    def validate(self, n_state: int | None = None) -> None:
        for name in self.experiments:
            if name not in EXPERIMENTS:
                raise ConfigError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
        if not self.experiments:
            raise ConfigError("no experiment selected")
        for label, grid in (("rho", self.rho_grid), ("snr", self.snr_grid_db), ("k", self.k_grid)):
            if grid is not None and len(grid) == 0:
                raise ConfigError(f"{label} grid is empty")
        if self.rho_grid is not None and any(not 0.0 <= r < 1.0 for r in self.rho_grid):
            raise ConfigError("rho values must lie in [0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0.0 < self.alpha_target < 0.5:
            raise ConfigError("alpha must lie in (0, 0.5)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.n_mc < 1000:
            raise ConfigError("n_mc must be at least 1000")
        if not self.block_sizes or any(b < 1 for b in self.block_sizes):
            raise ConfigError("block sizes must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if n_state is not None and self.k_grid is not None and any(k < n_state for k in self.k_grid):
            raise ConfigError(f"every k must be at least the state dimension N={n_state}")

    def rhos(self, experiment: str) -> tuple[float, ...]:
        if self.rho_grid is not None:
            return tuple(self.rho_grid)
        return DENSE_RHO if experiment in ("utility_vs_rho", "tradeoff") else TRAINING_RHO

    def snrs(self, experiment: str) -> tuple[float, ...]:
        if self.snr_grid_db is not None:
            return tuple(self.snr_grid_db)
        return UTILITY_SNR if experiment in ("utility_vs_rho", "tradeoff") else TRAINING_SNR

    def ks(self, n_state: int) -> tuple[int, ...]:
        if self.k_grid is not None:
            return tuple(self.k_grid)
        return tuple(m * n_state for m in K_MULTIPLES)


def _map(fn: Callable, items: list, jobs: int) -> list:
    if jobs == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _flatten(chunks: Iterable[list[dict]]) -> list[dict]:
    return [row for chunk in chunks for row in chunk]


def run_utility_sweep(config: ExperimentConfig, jacobian: Jacobian) -> tuple[list[dict], list[dict]]:
    """Optimal-attack utility per (rho, SNR), plus the maximizing rho for each SNR."""
    def point(p):
        rho, snr = p
        model = ObservationModel.toeplitz(jacobian, rho, snr)
        u = stealth_utility(model, optimal_attack(model))
        return {"experiment": "utility_vs_rho", "rho": rho, "snr_db": snr, "utility_nats": u.total}

    grid = [(r, s) for r in config.rhos("utility_vs_rho") for s in config.snrs("utility_vs_rho")]
    rows = _map(point, grid, config.jobs)
    maxima = []
    for snr in sorted(set(config.snrs("utility_vs_rho"))):
        best = max((r for r in rows if r["snr_db"] == snr), key=lambda r: (r["utility_nats"], -r["rho"]))
        maxima.append({"experiment": "utility_vs_rho_max", "snr_db": snr, "rho": best["rho"],
                       "utility_nats": best["utility_nats"]})
    return rows, maxima


def run_tradeoff_sweep(config: ExperimentConfig, jacobian: Jacobian) -> list[dict]:
    """Mutual information and KL divergence of the optimal attack per (rho, SNR)."""
    def point(p):
        rho, snr = p
        model = ObservationModel.toeplitz(jacobian, rho, snr)
        u = stealth_utility(model, optimal_attack(model))
        return {"experiment": "tradeoff", "rho": rho, "snr_db": snr,
                "mi_nats": u.mutual_information, "kl_nats": u.kl_divergence}

    grid = [(r, s) for r in config.rhos("tradeoff") for s in config.snrs("tradeoff")]
    return _map(point, grid, config.jobs)


def run_training_sweep(config: ExperimentConfig, jacobian: Jacobian) -> list[dict]:
    """Mean utility of sample-covariance attacks per (rho, SNR, K), with the exact-statistics baseline."""
    ks = config.ks(jacobian.N)

    def point(p):
        rho, snr = p
        model = ObservationModel.toeplitz(jacobian, rho, snr)
        baseline = stealth_utility(model, optimal_attack(model)).total
        out = []
        for k in ks:
            mean, _ = conditional_divergence_mc(model, k, config.trials, config.seed)
            out.append({"experiment": "training_utility", "rho": rho, "snr_db": snr, "k": k,
                        "mean_utility_nats": mean, "utility_nats": baseline})
        return out

    grid = [(r, s) for r in config.rhos("training_utility") for s in config.snrs("training_utility")]
    return _flatten(_map(point, grid, config.jobs))


def run_frobenius_sweep(config: ExperimentConfig, jacobian: Jacobian) -> list[dict]:
    """Mean normalized Frobenius distance between sample-covariance and optimal attacks per (rho, K).

    The attack covariances do not involve the noise, so there is no SNR axis.
    Training sets match those of :func:`run_training_sweep`.
    """
    ks = config.ks(jacobian.N)
    H = jacobian.matrix

    def point(rho):
        sxx = toeplitz_covariance(jacobian.N, rho)
        root = covariance_sqrt(sxx)
        reference = H @ sxx @ H.T
        out = []
        for k in ks:
            gaps = []
            for t in range(config.trials):
                x = gaussian_rows(root, k, make_rng(derive_seed(config.seed, t)))
                gaps.append(normalized_frobenius_gap(reference, H @ sample_covariance(x) @ H.T))
            out.append({"experiment": "frobenius_gap", "rho": rho, "k": k,
                        "frobenius_gap": float(np.mean(gaps))})
        return out

    return _flatten(_map(point, list(config.rhos("frobenius_gap")), config.jobs))


def run_detection_experiment(config: ExperimentConfig, jacobian: Jacobian) -> list[dict]:
    """LRT error rates and block-size exponents for the optimal attack and a zero-attack control.

    ``exponent_hat`` is NaN when no missed detection was observed.
    """
    def point(p):
        rho, snr = p
        model = ObservationModel.toeplitz(jacobian, rho, snr)
        out = []
        for label, attack in (("optimal", optimal_attack(model)),
                              ("zero", AttackCovariance(np.zeros((model.M, model.M))))):
            kl = kl_gaussian(measurement_covariance(model, attack.sigma_aa),
                             measurement_covariance(model))
            for block in config.block_sizes:
                report = stein_test(model, attack, block, config.alpha_target, config.n_mc, config.seed)
                out.append({"experiment": "detection", "rho": rho, "snr_db": snr, "attack": label,
                            "block": block, "alpha_hat": report.alpha_hat, "beta_hat": report.beta_hat,
                            "exponent_hat": report.exponent_hat, "kl_nats": kl})
        return out

    grid = [(r, s) for r in config.rhos("detection") for s in config.snrs("detection")]
    return _flatten(_map(point, grid, config.jobs))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, ".12g")
    return str(value)


def write_csv(rows: list[dict], kind: str, path: Path) -> None:
    columns = COLUMNS[kind]
    for row in rows:
        if tuple(row) != columns:
            raise ValueError(f"row columns {tuple(row)} do not match {kind} schema {columns}")
    ordered = sorted(rows, key=lambda r: tuple(r[c] for c in SORT_KEYS[kind]))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in ordered:
            writer.writerow([_fmt(row[c]) for c in columns])


def read_csv(path: str | Path) -> list[dict]:
    """Read an output CSV back, converting numeric columns to float/int."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for key, value in row.items():
            if key in ("experiment", "attack"):
                continue
            row[key] = int(value) if key in ("k", "block") else float(value)
    return rows


def run_experiments(config: ExperimentConfig) -> dict[str, Path]:
    """Run the configured experiments and write CSVs plus ``manifest.json`` to ``output_dir``."""
    config.validate()
    case, text = resolve_case(config.case_path)
    jacobian = build_jacobian(case)
    config.validate(n_state=jacobian.N)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written: dict[str, Path] = {}

    def emit(kind: str, rows: list[dict]) -> None:
        path = out_dir / f"{kind}.csv"
        write_csv(rows, kind, path)
        written[kind] = path

    for name in config.experiments:
        if name == "utility_vs_rho":
            rows, maxima = run_utility_sweep(config, jacobian)
            emit("utility_vs_rho", rows)
            emit("utility_vs_rho_max", maxima)
        elif name == "tradeoff":
            emit("tradeoff", run_tradeoff_sweep(config, jacobian))
        elif name == "training_utility":
            emit("training_utility", run_training_sweep(config, jacobian))
        elif name == "frobenius_gap":
            emit("frobenius_gap", run_frobenius_sweep(config, jacobian))
        elif name == "detection":
            emit("detection", run_detection_experiment(config, jacobian))

    manifest = {
        "library": "gridstealth",
        "version": __version__,
        "kernel_backend": _kernels.backend(),
        "case": str(config.case_path),
        "case_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "measurements": jacobian.M,
        "states": jacobian.N,
        "config": dataclasses.asdict(config),
        "outputs": sorted(p.name for p in written.values()),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written


# -- flat key/value configuration files ---------------------------------------

_LIST_FLOAT = {"rho": "rho_grid", "snr": "snr_grid_db"}
_LIST_INT = {"k": "k_grid", "blocks": "block_sizes"}
_SCALARS = {
    "case": ("case_path", str),
    "out": ("output_dir", str),
    "seed": ("seed", int),
    "trials": ("trials", int),
    "alpha": ("alpha_target", float),
    "n_mc": ("n_mc", int),
    "jobs": ("jobs", int),
}
CONFIG_KEYS = ("experiment",) + tuple(_SCALARS) + tuple(_LIST_FLOAT) + tuple(_LIST_INT)


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def apply_setting(config: ExperimentConfig, key: str, value: str) -> None:
    """Set one ``key = value`` pair (config-file or CLI syntax) on ``config``."""
    key = key.strip().replace("-", "_")
    try:
        if key == "experiment":
            names = _split(value)
            config.experiments = EXPERIMENTS if names == ["all"] else tuple(names)
        elif key in _LIST_FLOAT:
            setattr(config, _LIST_FLOAT[key], tuple(float(v) for v in _split(value)))
        elif key in _LIST_INT:
            setattr(config, _LIST_INT[key], tuple(int(v) for v in _split(value)))
        elif key in _SCALARS:
            attr, kind = _SCALARS[key]
            setattr(config, attr, kind(value.strip()))
        else:
            raise ConfigError(f"unknown configuration key {key!r}; known keys: {CONFIG_KEYS}")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value for {key!r}: {value!r}") from None


def parse_config(text: str, config: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse the flat ``key = value`` format; ``#`` starts a comment."""
    config = config or ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        apply_setting(config, key, value)
    return config
