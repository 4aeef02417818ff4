"""Tuning-parameter selection: cross-validation, filter-fraction truncation, theoretical formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contrast import TruncationConfig, empirical_moments, pseudo_likelihood, stationary_cov_truncated
from .errors import DomainError, InsufficientDataError
from .estimators import DriftEstimate, SolverConfig, fit_lasso, fit_slope
from .levy import LevyModel, cov_brownian, nu2_matrix
from .linalg import solve_lyapunov, spectral_norm
from .ou import ObservationSet

FAMILIES = ("lasso", "slope")


def default_grid(lo: float = 1e-3, hi: float = 10.0, num: int = 30) -> tuple[float, ...]:
    return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), num))


@dataclass(frozen=True)
class CvConfig:
    train_fraction: float = 0.8
    grid: tuple[float, ...] = field(default_factory=default_grid)

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise DomainError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        grid = tuple(float(g) for g in self.grid)
        if not grid or any(not g > 0 for g in grid):
            raise DomainError("lambda grid must be nonempty and positive")
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class CvRow:
    lam: float
    validation_score: float
    iters: int


@dataclass(frozen=True)
class CvResult:
    best_lambda: float
    table: tuple[CvRow, ...]


def split_train_validation(obs: ObservationSet, train_fraction: float) -> tuple[ObservationSet, ObservationSet]:
    """Consecutive split of the windows: training prefix, validation suffix."""
    n_train = int(round(train_fraction * obs.n))
    if n_train < 1 or n_train >= obs.n:
        raise DomainError(f"train fraction {train_fraction} leaves an empty segment for n = {obs.n}")
    return obs.window_slice(0, n_train), obs.window_slice(n_train, obs.n)


def cross_validate(
    obs: ObservationSet,
    trunc: TruncationConfig,
    family: str,
    cfg: CvConfig | None = None,
    solver: SolverConfig | None = None,
) -> CvResult:
    """Pick lambda by training on the first part of the path and scoring the
    truncated pseudo-likelihood on the rest.  Ties go to the smaller lambda."""
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")
    cfg = cfg or CvConfig()
    train, valid = split_train_validation(obs, cfg.train_fraction)
    moments = empirical_moments(train, trunc)
    fit = fit_lasso if family == "lasso" else fit_slope
    rows = []
    for lam in sorted(set(cfg.grid)):
        est = fit(moments, lam, solver)
        rows.append(CvRow(lam, pseudo_likelihood(est.a_hat, valid, trunc), est.iters_used))
    best = rows[0]
    for row in rows[1:]:
        if row.validation_score < best.validation_score:
            best = row
    return CvResult(best.lam, tuple(rows))


def _upper_order_stat(values: np.ndarray, target_fraction: float) -> float:
    """Smallest threshold ``r`` with ``#{v >= r} <= target_fraction * n`` (strict keep: v < r)."""
    n = values.size
    drop = int(math.floor(target_fraction * n + 1e-9))
    k = n - drop  # keep the k smallest
    r = float(np.sort(values)[k - 1])
    return r + 1e-12 * max(1.0, abs(r))


def pick_truncation(obs: ObservationSet, target_fraction: float = 0.10) -> TruncationConfig:
    """Radius ``b`` and threshold ``eta`` that each filter out at most ``target_fraction`` of the windows."""
    if not 0 < target_fraction < 1:
        raise DomainError(f"target_fraction must lie in (0, 1), got {target_fraction}")
    if obs.n < 10:
        raise InsufficientDataError(f"need at least 10 windows to pick truncation levels, got {obs.n}")
    state_norms = np.linalg.norm(obs.obs[:-1], axis=1)
    incr_norms = np.linalg.norm(obs.increments, axis=1)
    return TruncationConfig(
        b_radius=_upper_order_stat(state_norms, target_fraction),
        eta=_upper_order_stat(incr_norms, target_fraction),
    )


# --- theoretical choices -------------------------------------------------------------


@dataclass(frozen=True)
class Continuous:
    pass


@dataclass(frozen=True)
class BoundedJumps:
    a0: float

    def __post_init__(self):
        if not self.a0 > 0:
            raise DomainError(f"jump bound a0 must be > 0, got {self.a0}")


@dataclass(frozen=True)
class SubWeibull:
    alpha: float
    c_alpha: float

    def __post_init__(self):
        if not self.alpha > 0 or not self.c_alpha > 0:
            raise DomainError(f"sub-Weibull parameters must be > 0, got {self.alpha}, {self.c_alpha}")


@dataclass(frozen=True)
class PolyMoment:
    p: float

    def __post_init__(self):
        if not self.p >= 2:
            raise DomainError(f"moment order p must be >= 2, got {self.p}")


TailClass = Continuous | BoundedJumps | SubWeibull | PolyMoment


@dataclass(frozen=True)
class TheoryInputs:
    tail_class: TailClass
    delta_exponent: float = 1.0
    c_star: float = 1.0


def theoretical_eta(
    inputs: TheoryInputs | TailClass,
    t: float,
    delta_n: float,
    d: int,
    a0_norm: float,
    lam_max_noise: float,
) -> float:
    """Minimal truncation level guaranteeing the truncation bias is O(d Delta / T).

    ``a0_norm`` is the spectral norm of the drift (or a bound) and
    ``lam_max_noise`` the largest eigenvalue of ``C + nu2``.
    """
    if not isinstance(inputs, TheoryInputs):
        inputs = TheoryInputs(inputs)
    tail = inputs.tail_class
    delta = inputs.delta_exponent
    if not t > 1:
        raise DomainError(f"T must be > 1, got {t}")
    if delta_n < 0 or a0_norm < 0 or lam_max_noise < 0 or d < 1 or delta <= 0:
        raise DomainError("theoretical_eta needs nonnegative Delta, ||A0||, lambda_max and d >= 1, delta > 0")
    log_t = math.log(t)
    if isinstance(tail, Continuous):
        return math.sqrt(32.0 * delta * log_t * d * delta_n * math.exp(2.0 * delta_n * a0_norm) * lam_max_noise)
    if isinstance(tail, BoundedJumps):
        gauss = math.sqrt(32.0 * delta_n * lam_max_noise)
        jump = 8.0 / 3.0 * tail.a0 * math.sqrt(delta * log_t)
        return math.sqrt(d * delta * log_t) * math.exp(delta_n * a0_norm) * max(gauss, jump)
    if isinstance(tail, SubWeibull):
        gauss = math.sqrt(32.0 * delta * log_t * lam_max_noise)
        jump = 8.0 * delta * log_t ** (1.0 + 1.0 / tail.alpha) / (3.0 * tail.c_alpha ** (1.0 / tail.alpha))
        return math.sqrt(d) * math.exp(delta_n * a0_norm) * max(gauss, jump)
    if isinstance(tail, PolyMoment):
        return t ** (1.0 / tail.p) * d ** (0.5 - 1.0 / tail.p)
    raise DomainError(f"unknown tail class {tail!r}")


def gamma_factor(delta_n: float, a0: np.ndarray, model: LevyModel, b_radius: float = math.inf, rng=None) -> float:
    """``lambda_max(C + nu2) * max(lambda_max(C_inf(B)), 1) * exp(Delta ||A0||)``.

    ``C_inf(B)`` comes from the Lyapunov equation when ``b`` is infinite and
    from the Gaussian Monte-Carlo surrogate otherwise.
    """
    noise = cov_brownian(model) + nu2_matrix(model)
    c_inf = solve_lyapunov(a0, noise)
    if not math.isinf(b_radius):
        c_inf = stationary_cov_truncated(c_inf, b_radius, rng)
    lam_noise = float(np.linalg.eigvalsh(noise)[-1])
    lam_cinf = float(np.linalg.eigvalsh(c_inf)[-1])
    return lam_noise * max(lam_cinf, 1.0) * math.exp(delta_n * spectral_norm(a0))


def theoretical_lambda(kind: str, t: float, d: int, s: int, gamma: float, c_star: float = 1.0) -> float:
    """Tuning parameter at equality in the oracle-inequality conditions."""
    if kind not in FAMILIES:
        raise DomainError(f"unknown family {kind!r}; expected one of {FAMILIES}")
    if not 1 <= s <= d * d:
        raise DomainError(f"sparsity s = {s} out of range [1, {d * d}]")
    if not t > 0 or not gamma > 0 or not c_star > 0:
        raise DomainError("T, gamma and c_star must be > 0")
    base = 2.0 * c_star * math.sqrt(gamma / t)
    if kind == "slope":
        return base
    return base * math.sqrt(math.log(2.0 * math.e * d * d / s))


def fit_family(family: str, obs: ObservationSet, trunc: TruncationConfig, lam: float, solver: SolverConfig | None = None) -> DriftEstimate:
    moments = empirical_moments(obs, trunc)
    return (fit_lasso if family == "lasso" else fit_slope)(moments, lam, solver)
