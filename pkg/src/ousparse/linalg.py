"""Dense matrix kernels: matrix exponential, Lyapunov solve, eigenvalue extremes, norms.

Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, StabilityError

SYM_TOL = 1e-10

# Pade(13, 13) numerator coefficients and the largest 1-norm for which the
# unscaled approximant is accurate to double precision (Higham 2005).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
THETA13 = 5.371920351148152


def as_matrix(m, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D float array, optionally square."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def check_symmetric(m: np.ndarray, tol: float = SYM_TOL, name: str = "matrix") -> None:
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if m.size and np.max(np.abs(m - m.T)) > tol * scale:
        raise DomainError(f"{name} is not symmetric within {tol:g}")


def expm(m) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade approximant."""
    a = as_matrix(m, square=True)
    n = a.shape[0]
    ident = np.eye(n)
    if n == 0:
        return ident
    norm1 = float(np.max(np.sum(np.abs(a), axis=0)))
    if norm1 == 0.0:
        return ident
    s = 0
    if norm1 > THETA13:
        s = int(math.ceil(math.log2(norm1 / THETA13)))
        a = a / (2.0**s)

    b = _PADE13
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6
        + b[5] * a4
        + b[3] * a2
        + b[1] * ident
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6
        + b[4] * a4
        + b[2] * a2
        + b[0] * ident
    )
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def solve_lyapunov(a, q) -> np.ndarray:
    """Solve ``A C + C A^T = Q`` for symmetric ``C``.

    The equation is vectorised into the Kronecker system
    ``(I (x) A + A (x) I) vec(C) = vec(Q)``, which is fine for d <= 50.
    """
    a = as_matrix(a, square=True, name="A")
    q = as_matrix(q, square=True, name="Q")
    if a.shape != q.shape:
        raise DimensionError(f"A {a.shape} and Q {q.shape} differ in size")
    check_symmetric(q, name="Q")
    d = a.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    eig = np.linalg.eigvals(a)
    if np.min(eig.real) <= 0.0:
        raise StabilityError(
            f"A is not in M+ (min real part of eigenvalues = {np.min(eig.real):.3g})"
        )
    ident = np.eye(d)
    kron = np.kron(ident, a) + np.kron(a, ident)
    try:
        lu = scipy.linalg.lu_factor(kron, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise StabilityError("Kronecker system of the Lyapunov equation is singular") from exc

    def solve(rhs):
        c = scipy.linalg.lu_solve(lu, rhs.reshape(-1, order="F")).reshape((d, d), order="F")
        return 0.5 * (c + c.T)

    c = solve(q)
    # one step of iterative refinement
    return c + solve(q - a @ c - c @ a.T)


def eig_extremes_sym(m) -> tuple[float, float]:
    """(lambda_min, lambda_max) of a symmetric matrix."""
    a = as_matrix(m, square=True)
    check_symmetric(a)
    w = np.linalg.eigvalsh(0.5 * (a + a.T))
    return float(w[0]), float(w[-1])


def spectral_norm(m) -> float:
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def entrywise_norm(m, p: float = 2.0) -> float:
    """Entrywise p-norm of a matrix; ``p=inf`` gives the max absolute entry."""
    a = as_matrix(m)
    if not p >= 1:
        raise DomainError(f"entrywise norm needs p >= 1, got {p}")
    absval = np.abs(a).ravel()
    if absval.size == 0:
        return 0.0
    if math.isinf(p):
        return float(absval.max())
    if p == 1:
        return float(absval.sum())
    top = float(absval.max())
    if top == 0.0 or not math.isfinite(top):
        return top
    # scale by the largest entry so powers neither underflow nor overflow
    scaled = absval / top
    if p == 2:
        return top * math.sqrt(float(np.dot(scaled, scaled)))
    return top * float(np.sum(scaled**p) ** (1.0 / p))


def count_nonzero(m) -> int:
    """Number of non-zero entries, i.e. the l0 'norm'."""
    return int(np.count_nonzero(as_matrix(m)))


def min_real_eig(m) -> float:
    a = as_matrix(m, square=True)
    return float(np.min(np.linalg.eigvals(a).real))


def psd_sqrt_factor(c: np.ndarray) -> np.ndarray:
    """A factor ``F`` with ``F F^T = C`` for a symmetric PSD ``C`` (possibly singular)."""
    w, v = np.linalg.eigh(0.5 * (c + c.T))
    return v * np.sqrt(np.clip(w, 0.0, None))
