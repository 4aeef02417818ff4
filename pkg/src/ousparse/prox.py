"""l1 and sorted-l1 (Slope) norms and their proximal operators."""
from __future__ import annotations

import numba
import numpy as np

from .errors import DimensionError, DomainError


def slope_weights(lam: float, p: int) -> np.ndarray:
    """Weights ``lam * sqrt(log(2p / j))``, j = 1..p (p = d^2 for a d x d matrix)."""
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    j = np.arange(1, p + 1)
    return lam * np.sqrt(np.log(2.0 * p / j))


def _check_weights(w: np.ndarray, size: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size != size:
        raise DimensionError(f"weights have length {w.size}, expected {size}")
    if np.any(w < 0):
        raise DomainError("weights must be nonnegative")
    if np.any(np.diff(w) > 0):
        raise DomainError("weights must be nonincreasing")
    return w


def sorted_l1_norm(m, w) -> float:
    """``sum_j w_j |v|_(j)`` with ``|v|_(1) >= |v|_(2) >= ...`` over the entries of ``m``."""
    v = np.abs(np.asarray(m, dtype=float)).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if w.size != v.size:
        raise DimensionError(f"weights have length {w.size}, expected {v.size}")
    return float(np.dot(w, np.sort(v)[::-1]))


def prox_l1(v, tau: float) -> np.ndarray:
    """Soft thresholding ``sign(v) * max(|v| - tau, 0)``."""
    if not tau >= 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


@numba.njit(cache=True)
def _pava_nonincreasing(y):
    """Nonincreasing isotonic fit of ``y`` followed by clipping at zero (stack-based)."""
    p = y.shape[0]
    start = np.empty(p, np.int64)
    total = np.empty(p)
    mean = np.empty(p)
    k = 0
    for i in range(p):
        start[k] = i
        total[k] = y[i]
        mean[k] = y[i]
        while k > 0 and mean[k - 1] <= mean[k]:
            k -= 1
            total[k] += total[k + 1]
            mean[k] = total[k] / (i - start[k] + 1)
        k += 1
    out = np.empty(p)
    for b in range(k):
        stop = start[b + 1] if b + 1 < k else p
        val = mean[b] if mean[b] > 0.0 else 0.0
        for i in range(start[b], stop):
            out[i] = val
    return out


def prox_sorted_l1(v, w) -> np.ndarray:
    """Proximal operator of the sorted-l1 norm with nonincreasing weights ``w``.

    Returns the minimiser of ``1/2 ||x - v||^2 + sum_j w_j |x|_(j)``.  Ties in
    ``|v|`` are ordered by original index.
    """
    v = np.asarray(v, dtype=float)
    shape = v.shape
    flat = v.ravel()
    w = _check_weights(w, flat.size)
    if flat.size == 0:
        return flat.reshape(shape)
    mag = np.abs(flat)
    order = np.argsort(-mag, kind="stable")
    fitted = _pava_nonincreasing(mag[order] - w)
    out = np.empty_like(flat)
    out[order] = fitted
    return (np.sign(flat) * out).reshape(shape)

