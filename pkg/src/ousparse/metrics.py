"""Estimation error and support-recovery metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .linalg import as_matrix, entrywise_norm

ZERO_TOL = 1e-6


def _pair(a_hat, a0) -> tuple[np.ndarray, np.ndarray]:
    a_hat = as_matrix(a_hat, name="a_hat")
    a0 = as_matrix(a0, name="a0")
    if a_hat.shape != a0.shape:
        raise DimensionError(f"a_hat {a_hat.shape} and a0 {a0.shape} differ in shape")
    return a_hat, a0


def l1_l2_errors(a_hat, a0) -> tuple[float, float]:
    """Entrywise l1 and l2 (Frobenius) norms of ``a_hat - a0``."""
    a_hat, a0 = _pair(a_hat, a0)
    diff = a_hat - a0
    return entrywise_norm(diff, 1), entrywise_norm(diff, 2)


@dataclass(frozen=True)
class SupportReport:
    correct: int  # both zero or both non-zero
    missed: int  # true non-zero estimated as zero
    spurious: int  # true zero estimated as non-zero
    zero_tol: float = ZERO_TOL

    @property
    def total(self) -> int:
        return self.correct + self.missed + self.spurious


def support_report(a_hat, a0, zero_tol: float = ZERO_TOL) -> SupportReport:
    a_hat, a0 = _pair(a_hat, a0)
    est_nz = np.abs(a_hat) > zero_tol
    true_nz = a0 != 0
    missed = int(np.sum(true_nz & ~est_nz))
    spurious = int(np.sum(~true_nz & est_nz))
    return SupportReport(a0.size - missed - spurious, missed, spurious, zero_tol)
