"""Gaussian data-injection attacks on DC state estimation and their detection."""
from .attack import (
    AttackCovariance,
    UtilityBreakdown,
    attack_from_samples,
    conditional_divergence_mc,
    custom_attack,
    equal_trace_attack,
    kl_gaussian,
    mutual_information,
    normalized_frobenius_gap,
    optimal_attack,
    optimal_utility_closed_form,
    reduced_objective,
    stationarity_residual,
    stealth_utility,
)
from .cases import load_builtin, random_case, resolve_case
from .dc_model import Jacobian, MeasurementDescriptor, build_jacobian, export_csv
from .detection import (
    DetectionReport,
    LrtDetector,
    calibrate_threshold,
    empirical_error_rates,
    log_lrt,
    stein_exponent,
    stein_test,
)
from .errors import (
    CaseError,
    ConfigError,
    GridStealthError,
    NumericalError,
    ParameterError,
    ShapeError,
)
from .matpower import BranchRecord, BusRecord, BusRole, CaseFile, format_case, load_case, parse_case
from .stats import (
    ObservationModel,
    StateSampleSet,
    measurement_covariance,
    noise_variance_for_snr,
    sample_covariance,
    sample_gaussian,
    snr_db,
    toeplitz_covariance,
)

__version__ = "0.1.0"
