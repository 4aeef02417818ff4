import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_stable
from ousparse.errors import DimensionError, DomainError, StabilityError
from ousparse.linalg import (
    check_symmetric,
    eig_extremes_sym,
    entrywise_norm,
    expm,
    solve_lyapunov,
    spectral_norm,
)


def power_series_exp(m, terms=30):
    out = np.eye(m.shape[0])
    term = np.eye(m.shape[0])
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


def test_expm_zero_is_identity():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))


def test_expm_diagonal():
    np.testing.assert_allclose(expm(np.diag([1.0, -2.0])), np.diag([math.e, math.exp(-2)]), rtol=1e-14)


def test_expm_rotation_matches_power_series():
    th = 0.3
    m = np.array([[0.0, -th], [th, 0.0]])
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    np.testing.assert_allclose(expm(m), rot, atol=1e-15)
    np.testing.assert_allclose(expm(m), power_series_exp(m), atol=1e-15)


@pytest.mark.parametrize("scale", [0.01, 1.0, 4.0, 20.0])
def test_expm_against_power_series_with_scaling(rng, scale):
    m = rng.normal(size=(5, 5))
    m *= scale / np.linalg.norm(m, 1)
    # the series is only accurate for moderate norms; square a scaled-down series otherwise
    k = max(0, math.ceil(math.log2(scale)))
    ref = power_series_exp(m / 2**k, 40)
    for _ in range(k):
        ref = ref @ ref
    np.testing.assert_allclose(expm(m), ref, rtol=1e-11, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-1.25, 1.25)))
def test_expm_inverse_property(m):
    # ||M||_2 <= ||M||_F <= 5
    prod = expm(m) @ expm(-m)
    np.testing.assert_allclose(prod, np.eye(4), atol=1e-10)


def test_expm_rejects_non_square():
    with pytest.raises(DimensionError):
        expm(np.ones((2, 3)))


def test_lyapunov_scalar_multiple_of_identity():
    np.testing.assert_allclose(solve_lyapunov(0.5 * np.eye(2), np.eye(2)), np.eye(2), atol=1e-15)


def test_lyapunov_decoupled():
    np.testing.assert_allclose(solve_lyapunov(np.diag([1.0, 2.0]), np.eye(2)), np.diag([0.5, 0.25]), atol=1e-15)


def test_lyapunov_residual_random(rng):
    a = random_stable(4, rng)
    c = solve_lyapunov(a, np.eye(4))
    assert np.linalg.norm(a @ c + c @ a.T - np.eye(4), 2) <= 1e-10


def test_lyapunov_matches_quadrature(rng):
    a = random_stable(3, rng, margin=0.5)
    b = rng.normal(size=(3, 3))
    q = b @ b.T
    t_int = 50.0 / np.linalg.eigvals(a).real.min()
    # composite Simpson on exp(-sA) Q exp(-sA)^T with a precomputed step propagator
    n = 20000
    h = t_int / n
    step = expm(-h * a)
    e = np.eye(3)
    acc = np.zeros((3, 3))
    for k in range(n + 1):
        w = 1 if k in (0, n) else (4 if k % 2 else 2)
        acc += w * (e @ q @ e.T)
        e = step @ e
    quad = acc * h / 3
    np.testing.assert_allclose(solve_lyapunov(a, q), quad, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_lyapunov_output_symmetric_psd(d, seed):
    r = np.random.default_rng(seed)
    a = random_stable(d, r)
    b = r.normal(size=(d, d))
    c = solve_lyapunov(a, b @ b.T)
    np.testing.assert_allclose(c, c.T, atol=0)
    assert np.linalg.eigvalsh(c).min() >= -1e-10


def test_lyapunov_rejects_unstable():
    with pytest.raises(StabilityError):
        solve_lyapunov(np.diag([1.0, -0.1]), np.eye(2))


def test_lyapunov_rejects_asymmetric_q():
    with pytest.raises(DomainError):
        solve_lyapunov(np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_eig_extremes_trivial():
    assert eig_extremes_sym(np.diag([3.0, -1.0, 2.0])) == pytest.approx((-1.0, 3.0))
    assert eig_extremes_sym(np.eye(4)) == pytest.approx((1.0, 1.0))


def _char_poly_roots_by_bisection(m):
    """All eigenvalues of a symmetric matrix via Sturm-free sign scanning of det(M - xI)."""
    d = m.shape[0]
    bound = np.abs(m).sum(axis=1).max() + 1.0
    f = lambda x: np.linalg.det(m - x * np.eye(d))  # noqa: E731
    grid = np.linspace(-bound, bound, 20001)
    vals = np.array([f(x) for x in grid])
    roots = []
    for lo, hi, flo, fhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if flo == 0:
            roots.append(lo)
        elif flo * fhi < 0:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    return roots


def test_eig_extremes_vs_characteristic_polynomial(rng):
    b = rng.normal(size=(5, 5))
    m = 0.5 * (b + b.T)
    roots = _char_poly_roots_by_bisection(m)
    assert len(roots) == 5
    lo, hi = eig_extremes_sym(m)
    assert lo == pytest.approx(min(roots), abs=1e-8)
    assert hi == pytest.approx(max(roots), abs=1e-8)


def test_check_symmetric_rejects():
    with pytest.raises(DomainError):
        check_symmetric(np.array([[1.0, 1e-6], [0.0, 1.0]]))


def test_spectral_norm_trivial():
    assert spectral_norm(np.diag([2.0, -3.0])) == pytest.approx(3.0)
    assert spectral_norm(np.zeros((3, 3))) == 0.0


def test_spectral_norm_power_iteration(rng):
    m = rng.normal(size=(4, 3))
    g = m.T @ m
    v = np.ones(3)
    for _ in range(5000):
        v = g @ v
        v /= np.linalg.norm(v)
    assert spectral_norm(m) == pytest.approx(math.sqrt(v @ g @ v), abs=1e-8)


def test_entrywise_norm_examples():
    assert entrywise_norm(np.array([[1.0, -1.0], [1.0, -1.0]]), 1) == 4.0
    assert entrywise_norm(np.eye(3), 2) == pytest.approx(math.sqrt(3))
    assert entrywise_norm(np.array([[3.0, 0.0], [0.0, -4.0]]), math.inf) == 4.0


def test_entrywise_norm_rejects_p_below_one():
    with pytest.raises(DomainError):
        entrywise_norm(np.eye(2), 0.5)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 4), elements=st.floats(-10, 10)))
def test_frobenius_dominates_operator_norm(m):
    assert spectral_norm(m) <= entrywise_norm(m, 2) * (1 + 1e-12) + 1e-300


@pytest.mark.parametrize("scale", [1e-249, 1e200])
def test_entrywise_norm_no_underflow_or_overflow(scale):
    m = np.full((3, 4), scale)
    assert entrywise_norm(m, 2) == pytest.approx(math.sqrt(12) * scale, rel=1e-14)
    assert entrywise_norm(m, 3) == pytest.approx(12 ** (1 / 3) * scale, rel=1e-14)
