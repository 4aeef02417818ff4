"""Sparse drift estimation for Levy-driven Ornstein-Uhlenbeck processes."""
__version__ = "0.1.0"

from .contrast import (
    EmpiricalMoments,
    TruncationConfig,
    contrast_rt,
    empirical_moments,
    gradient,
    pseudo_likelihood,
)
from .errors import (
    ConfigError,
    DimensionError,
    DivergenceError,
    DomainError,
    InfiniteMomentError,
    InsufficientDataError,
    OusparseError,
    RankError,
    ReplayError,
    StabilityError,
    UnsupportedError,
)
from .estimators import DriftEstimate, SolverConfig, lasso, slope, true_mle, truncated_mle
from .levy import JumpSpec, LevyModel, sample_increment, sample_increments
from .linalg import entrywise_norm, expm, solve_lyapunov, spectral_norm
from .experiment import replay, run_scenario
from .metrics import SupportReport, l1_l2_errors, support_report
from .ou import (
    DriftMatrix,
    ObservationSet,
    Trajectory,
    exact_gaussian_transition,
    generate_sparse_stable_drift,
    simulate_euler,
    simulate_euler_endpoints,
    stationary_covariance,
    stationary_start,
    subsample,
)
from .prox import prox_sorted_l1, slope_weights, sorted_l1_norm
from .rng import RngState
from .tuning import CvConfig, cross_validate, pick_truncation, theoretical_eta, theoretical_lambda

__all__ = [name for name, obj in dict(globals()).items() if not name.startswith("_") and not hasattr(obj, "__path__") and getattr(obj, "__module__", "").startswith("ousparse")]
