"""Drift estimators: Lasso, Slope, truncated MLE and the (simulation-only) true MLE."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contrast import (
    EmpiricalMoments,
    TruncationConfig,
    empirical_moments,
    gradient_from_moments,
    likelihood_from_moments,
)
from .errors import DimensionError, DivergenceError, DomainError, RankError, UnsupportedError
from .ou import ObservationSet
from .prox import prox_l1, prox_sorted_l1, slope_weights, sorted_l1_norm

RANK_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 10_000
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")


@dataclass(frozen=True)
class DriftEstimate:
    a_hat: np.ndarray
    penalty: str  # "lasso", "slope" or "none"
    lam: float | None
    iters_used: int
    final_objective: float
    kept_fraction: float
    converged: bool = True
    objective_trace: tuple[float, ...] = field(default=(), repr=False)


def _smooth(a: np.ndarray, m: EmpiricalMoments) -> float:
    return likelihood_from_moments(a, m)


def fista_minimize(
    moments: EmpiricalMoments,
    penalty_prox: Callable[[np.ndarray, float], np.ndarray],
    penalty_value: Callable[[np.ndarray], float],
    cfg: SolverConfig | None = None,
    init: np.ndarray | None = None,
    *,
    penalty: str = "none",
    lam: float | None = None,
    keep_trace: bool = False,
) -> DriftEstimate:
    """Accelerated proximal gradient for ``L(A) + penalty(A)``.

    ``penalty_prox(V, t)`` must return the prox of ``t * penalty`` at ``V``.
    The step starts at ``1 / lambda_max(C_eta)`` and is halved whenever the
    quadratic upper bound fails.  A candidate that would increase the objective
    is rejected and the momentum restarted, so accepted objectives never
    increase.  Stops once both the relative objective change and the relative
    iterate change fall below ``rel_tol``.
    """
    cfg = cfg or SolverConfig()
    c = moments.c_hat_eta
    h = moments.h_hat
    d = h.shape[0]
    x = np.zeros((d, d)) if init is None else np.array(init, dtype=float)
    if x.shape != (d, d):
        raise DimensionError(f"init must be {d}x{d}, got {x.shape}")
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(h))):
        raise DivergenceError("empirical moments are not finite")

    lip = float(np.linalg.eigvalsh(c)[-1]) if d else 0.0
    if not lip > 0:
        lip = 1.0
    fx = _smooth(x, moments) + penalty_value(x)
    y = x
    t = 1.0
    at_restart = True
    converged = False
    trace = [fx] if keep_trace else []
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = gradient_from_moments(y, moments)
        fy = _smooth(y, moments)
        while True:
            z = penalty_prox(y - g / lip, 1.0 / lip)
            diff = z - y
            fz_smooth = _smooth(z, moments)
            bound = fy + float(np.sum(g * diff)) + 0.5 * lip * float(np.sum(diff * diff))
            if fz_smooth <= bound + 1e-12 * (1.0 + abs(fy)):
                break
            lip *= 2.0
        fz = fz_smooth + penalty_value(z)
        if not math.isfinite(fz):
            raise DivergenceError(f"objective became non-finite at iteration {it}")
        if fz > fx:
            if at_restart:
                # a plain proximal-gradient step from x cannot improve: x is optimal to rounding
                converged = True
                break
            t, y, at_restart = 1.0, x, True
            if keep_trace:
                trace.append(fx)
            continue
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = z + ((t - 1.0) / t_next) * (z - x)
        rel_obj = (fx - fz) / max(abs(fx), 1e-300)
        rel_step = math.sqrt(float(np.sum((z - x) ** 2))) / max(1.0, math.sqrt(float(np.sum(z * z))))
        x, fx, t, at_restart = z, fz, t_next, False
        if keep_trace:
            trace.append(fx)
        if rel_obj <= cfg.rel_tol and rel_step <= cfg.rel_tol:
            converged = True
            break
    return DriftEstimate(
        a_hat=x,
        penalty=penalty,
        lam=lam,
        iters_used=it,
        final_objective=fx,
        kept_fraction=moments.kept_fraction,
        converged=converged,
        objective_trace=tuple(trace),
    )


def lasso_objective(a: np.ndarray, moments: EmpiricalMoments, lam: float) -> float:
    return likelihood_from_moments(a, moments) + lam * float(np.abs(a).sum())


def slope_objective(a: np.ndarray, moments: EmpiricalMoments, lam: float) -> float:
    w = slope_weights(lam, a.size)
    return likelihood_from_moments(a, moments) + sorted_l1_norm(a, w)


def fit_lasso(moments: EmpiricalMoments, lam: float, cfg: SolverConfig | None = None, **kw) -> DriftEstimate:
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    return fista_minimize(
        moments,
        lambda v, step: prox_l1(v, lam * step),
        lambda a: lam * float(np.abs(a).sum()),
        cfg,
        penalty="lasso",
        lam=lam,
        **kw,
    )


def fit_slope(moments: EmpiricalMoments, lam: float, cfg: SolverConfig | None = None, **kw) -> DriftEstimate:
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    w = slope_weights(lam, moments.dim**2)
    return fista_minimize(
        moments,
        lambda v, step: prox_sorted_l1(v, w * step),
        lambda a: sorted_l1_norm(a, w),
        cfg,
        penalty="slope",
        lam=lam,
        **kw,
    )


def _solve_normal(h: np.ndarray, c: np.ndarray, what: str) -> np.ndarray:
    """Solve ``H + A C = 0`` for ``A`` with a relative rank guard (no pseudo-inverse)."""
    w = np.linalg.eigvalsh(c)
    if not w[-1] > 0 or w[0] <= RANK_TOL * w[-1]:
        raise RankError(
            f"{what}: empirical covariance is singular (eigenvalues in [{w[0]:.3g}, {w[-1]:.3g}]); "
            "increase b / eta or the observation horizon"
        )
    return -np.linalg.solve(c, h.T).T


def fit_mle(moments: EmpiricalMoments) -> DriftEstimate:
    a = _solve_normal(moments.h_hat, moments.c_hat_eta, "truncated MLE")
    return DriftEstimate(a, "none", None, 0, likelihood_from_moments(a, moments), moments.kept_fraction)


def lasso(obs: ObservationSet, trunc: TruncationConfig, lambda_l: float, cfg: SolverConfig | None = None) -> DriftEstimate:
    return fit_lasso(empirical_moments(obs, trunc), lambda_l, cfg)


def slope(obs: ObservationSet, trunc: TruncationConfig, lambda_s: float, cfg: SolverConfig | None = None) -> DriftEstimate:
    return fit_slope(empirical_moments(obs, trunc), lambda_s, cfg)


def truncated_mle(obs: ObservationSet, trunc: TruncationConfig) -> DriftEstimate:
    return fit_mle(empirical_moments(obs, trunc))


def true_mle(obs: ObservationSet) -> DriftEstimate:
    """MLE built from the continuous-part increments (available only for simulated data)."""
    if obs.cont_increments is None:
        raise UnsupportedError("true MLE needs continuous-part increments, which only simulated data carry")
    x = obs.obs[:-1]
    c_hat = (x.astype(np.longdouble).T @ x.astype(np.longdouble)).astype(float) * (obs.delta_n / obs.big_t)
    c_hat = 0.5 * (c_hat + c_hat.T)
    h_c = (obs.cont_increments.astype(np.longdouble).T @ x.astype(np.longdouble)).astype(float) / obs.big_t
    a = _solve_normal(h_c, c_hat, "true MLE")
    m = EmpiricalMoments(c_hat, c_hat, h_c, 1.0)
    return DriftEstimate(a, "none", None, 0, likelihood_from_moments(a, m), 1.0)
