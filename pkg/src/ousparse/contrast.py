"""Localised and truncated pseudo-likelihood for the drift matrix.

For observations ``X_{t_0}, ..., X_{t_n}`` with ``dX_i = X_{t_i} - X_{t_{i-1}}``
only windows with ``||X_{t_{i-1}}|| < b`` and ``||dX_i|| < eta`` (both strict)
enter the objective

    L(A) = (1/T) sum (A X)^T dX + (Delta/2T) sum ||A X||^2
         = tr(A H^T) + 1/2 tr(A C_eta A^T),

with ``H = (1/T) sum dX X^T`` and ``C_eta = (Delta/T) sum X X^T`` over kept windows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import as_matrix, psd_sqrt_factor
from .ou import ObservationSet
from .rng import as_rng_state


@dataclass(frozen=True)
class TruncationConfig:
    """Localisation radius ``b_radius`` and increment threshold ``eta`` (``inf`` disables)."""

    b_radius: float = math.inf
    eta: float = math.inf

    def __post_init__(self):
        if not self.b_radius > 0 or not self.eta > 0:
            raise DomainError(f"b_radius and eta must be > 0, got {self.b_radius}, {self.eta}")

    @classmethod
    def none(cls) -> "TruncationConfig":
        return cls()


@dataclass(frozen=True)
class EmpiricalMoments:
    c_hat: np.ndarray
    c_hat_eta: np.ndarray
    h_hat: np.ndarray
    kept_fraction: float
    ball_fraction: float = 1.0
    incr_fraction: float = 1.0

    @property
    def dim(self) -> int:
        return self.c_hat.shape[0]


def window_masks(obs: ObservationSet, trunc: TruncationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks ``(in_ball, small_increment)`` over the n windows."""
    x = obs.obs[:-1]
    dx = obs.increments
    in_ball = np.sqrt(np.einsum("ij,ij->i", x, x)) < trunc.b_radius
    small = np.sqrt(np.einsum("ij,ij->i", dx, dx)) < trunc.eta
    return in_ball, small


def _weighted_outer(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``sum_i w_i u_i v_i^T`` accumulated in extended precision."""
    ul = u.astype(np.longdouble) * w[:, None]
    vl = v.astype(np.longdouble)
    return (ul.T @ vl).astype(float)


def empirical_moments(obs: ObservationSet, trunc: TruncationConfig) -> EmpiricalMoments:
    n = obs.n
    if n < 1:
        raise DomainError("need at least one observation window")
    x = obs.obs[:-1]
    dx = obs.increments
    in_ball, small = window_masks(obs, trunc)
    kept = in_ball & small
    big_t = obs.big_t
    w_ball = in_ball.astype(float)
    w_kept = kept.astype(float)
    c_hat = _weighted_outer(x, x, w_ball) * (obs.delta_n / big_t)
    c_hat_eta = _weighted_outer(x, x, w_kept) * (obs.delta_n / big_t)
    h_hat = _weighted_outer(dx, x, w_kept) / big_t
    return EmpiricalMoments(
        c_hat=0.5 * (c_hat + c_hat.T),
        c_hat_eta=0.5 * (c_hat_eta + c_hat_eta.T),
        h_hat=h_hat,
        kept_fraction=float(kept.sum()) / n,
        ball_fraction=float(in_ball.sum()) / n,
        incr_fraction=float(small.sum()) / n,
    )


def _check_square(a, d: int, name: str = "A") -> np.ndarray:
    a = as_matrix(a, name=name)
    if a.shape != (d, d):
        raise DimensionError(f"{name} must be {d}x{d}, got {a.shape}")
    return a


def pseudo_likelihood(a, obs: ObservationSet, trunc: TruncationConfig) -> float:
    """Direct window-by-window evaluation of the pseudo-likelihood."""
    a = _check_square(a, obs.dim)
    in_ball, small = window_masks(obs, trunc)
    kept = in_ball & small
    x = obs.obs[:-1][kept]
    dx = obs.increments[kept]
    ax = x @ a.T
    linear = float(np.sum(ax * dx))
    quad = float(np.sum(ax * ax))
    return linear / obs.big_t + obs.delta_n * quad / (2.0 * obs.big_t)


def likelihood_from_moments(a: np.ndarray, m: EmpiricalMoments) -> float:
    """``tr(A H^T) + 1/2 tr(A C_eta A^T)``."""
    return float(np.sum(a * m.h_hat) + 0.5 * np.sum((a @ m.c_hat_eta) * a))


def gradient_from_moments(a: np.ndarray, m: EmpiricalMoments) -> np.ndarray:
    return m.h_hat + a @ m.c_hat_eta


def gradient(a, obs: ObservationSet, trunc: TruncationConfig) -> np.ndarray:
    """Gradient ``H + A C_eta`` of the pseudo-likelihood."""
    a = _check_square(a, obs.dim)
    return gradient_from_moments(a, empirical_moments(obs, trunc))


def contrast_rt(a, obs: ObservationSet, trunc: TruncationConfig) -> float:
    """Truncated least-squares contrast ``(1/T) sum ||dX_i + Delta A X_{i-1}||^2`` over kept windows.

    Uses the sign convention of the model ``dX = -A X dt + dZ`` so that
    ``R_T(A) = 2 Delta L(A) + (1/T) sum ||dX_i||^2`` and both share minimisers.
    """
    a = _check_square(a, obs.dim)
    in_ball, small = window_masks(obs, trunc)
    kept = in_ball & small
    x = obs.obs[:-1][kept]
    dx = obs.increments[kept]
    resid = dx + obs.delta_n * (x @ a.T)
    return float(np.sum(resid * resid)) / obs.big_t


def kept_increment_energy(obs: ObservationSet, trunc: TruncationConfig) -> float:
    """``(1/T) sum ||dX_i||^2`` over kept windows (the constant in R_T)."""
    in_ball, small = window_masks(obs, trunc)
    dx = obs.increments[in_ball & small]
    return float(np.sum(dx * dx)) / obs.big_t


def empirical_pred_norm(m, obs: ObservationSet, trunc: TruncationConfig) -> float:
    """Squared empirical norm ``||M X||^2_{l2_n(B, X, eta)} = tr(M C_eta M^T)``."""
    m = _check_square(m, obs.dim, "M")
    c = empirical_moments(obs, trunc).c_hat_eta
    return float(np.trace(m @ c @ m.T))


def stationary_cov_truncated(c_inf, b_radius: float, rng=None, draws: int = 1_000_000, chunk: int = 100_000) -> np.ndarray:
    """Monte-Carlo estimate of ``E[Y Y^T 1{||Y|| < b}]`` for ``Y ~ N(0, C_inf)``.

    There is no closed form under truncation; this Gaussian surrogate is used
    wherever the truncated stationary covariance is needed.
    """
    c_inf = as_matrix(c_inf, square=True, name="c_inf")
    if math.isinf(b_radius):
        return c_inf.copy()
    gen = as_rng_state(rng).gauss
    factor = psd_sqrt_factor(c_inf)
    d = c_inf.shape[0]
    acc = np.zeros((d, d))
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        y = gen.standard_normal((m, d)) @ factor.T
        keep = np.einsum("ij,ij->i", y, y) < b_radius**2
        yk = y[keep]
        acc += yk.T @ yk
        done += m
    return acc / draws
