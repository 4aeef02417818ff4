"""Simulation of Levy-driven OU processes ``dX = -A0 X dt + dZ`` and observation sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivergenceError, DomainError, InsufficientDataError, StabilityError, UnsupportedError
from .levy import LevyModel, cov_brownian, nu2_matrix, sample_increments
from .linalg import as_matrix, expm, min_real_eig, psd_sqrt_factor, solve_lyapunov
from .rng import as_rng_state

DT_FINE = 1e-2
DIVERGENCE_NORM = 1e12
BURN_IN_TIME_CONSTANTS = 10.0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DriftMatrix:
    a0: np.ndarray

    def __post_init__(self):
        a0 = as_matrix(self.a0, square=True, name="a0")
        if not min_real_eig(a0) > 0:
            raise StabilityError("drift matrix must have eigenvalues with positive real part")
        object.__setattr__(self, "a0", _frozen(a0))

    @property
    def dim(self) -> int:
        return self.a0.shape[0]

    @property
    def sparsity(self) -> int:
        return int(np.count_nonzero(self.a0))

    def min_real_eig(self) -> float:
        return min_real_eig(self.a0)


@dataclass(frozen=True)
class Trajectory:
    """Fine-grid path: ``states[k] = X_{k dt}`` and ``jumps[k]`` the jump added in step k."""

    dt_fine: float
    states: np.ndarray
    jumps: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        jumps = np.asarray(self.jumps, dtype=float)
        if states.ndim != 2 or jumps.ndim != 2:
            raise DimensionError("states and jumps must be 2-D arrays")
        if jumps.shape != (states.shape[0] - 1, states.shape[1]):
            raise DimensionError(
                f"jump ledger shape {jumps.shape} does not match {states.shape[0] - 1} steps"
            )
        object.__setattr__(self, "states", _frozen(states))
        object.__setattr__(self, "jumps", _frozen(jumps))

    @property
    def steps(self) -> int:
        return self.jumps.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def total_time(self) -> float:
        return self.steps * self.dt_fine

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt_fine


@dataclass(frozen=True)
class ObservationSet:
    """``n + 1`` equidistant observations at ``t_i = i * delta_n``."""

    delta_n: float
    obs: np.ndarray
    cont_increments: np.ndarray | None = None

    def __post_init__(self):
        obs = np.asarray(self.obs, dtype=float)
        if obs.ndim != 2 or obs.shape[0] < 2:
            raise DimensionError(f"need at least two d-vectors of observations, got shape {obs.shape}")
        if not self.delta_n > 0:
            raise DomainError(f"delta_n must be > 0, got {self.delta_n}")
        object.__setattr__(self, "obs", _frozen(obs))
        if self.cont_increments is not None:
            ci = np.asarray(self.cont_increments, dtype=float)
            if ci.shape != (obs.shape[0] - 1, obs.shape[1]):
                raise DimensionError(f"cont_increments shape {ci.shape} does not match observations")
            object.__setattr__(self, "cont_increments", _frozen(ci))

    @property
    def n(self) -> int:
        return self.obs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.obs.shape[1]

    @property
    def big_t(self) -> float:
        return self.n * self.delta_n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.delta_n

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.obs, axis=0)

    def window_slice(self, start: int, stop: int) -> "ObservationSet":
        """Observations covering windows ``start .. stop-1`` (states ``start .. stop``)."""
        if not 0 <= start < stop <= self.n:
            raise DomainError(f"invalid window range [{start}, {stop}) for n = {self.n}")
        ci = None if self.cont_increments is None else self.cont_increments[start:stop]
        return ObservationSet(self.delta_n, self.obs[start : stop + 1], ci)


def drift_from_offdiagonal(offdiag) -> DriftMatrix:
    """Fill the diagonal with the row-wise absolute off-diagonal sum plus 0.1."""
    a = np.array(as_matrix(offdiag, square=True), dtype=float)
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, np.abs(a).sum(axis=1) + 0.1)
    return DriftMatrix(a)


def generate_sparse_stable_drift(d: int, s: int, value_range=(-0.5, 0.5), rng=None) -> DriftMatrix:
    """Random ``s``-sparse, diagonally dominant drift matrix in M+.

    ``s - d`` distinct off-diagonal positions receive i.i.d. uniform values on
    ``value_range``; the diagonal is then set by :func:`drift_from_offdiagonal`.
    """
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if not d <= s <= d * d:
        raise DomainError(f"sparsity s = {s} must lie in [d, d^2] = [{d}, {d * d}]")
    lo, hi = (float(v) for v in value_range)
    if not lo < hi:
        raise DomainError(f"value_range must satisfy lo < hi, got {value_range}")
    gen = as_rng_state(rng).aux
    flat = np.arange(d * d)
    off = flat[flat // d != flat % d]
    chosen = np.sort(gen.choice(off, size=s - d, replace=False))
    values = gen.uniform(lo, hi, size=s - d)
    a = np.zeros(d * d)
    a[chosen] = values
    drift = drift_from_offdiagonal(a.reshape(d, d))
    return drift


def _steps_for(total_time: float, dt_fine: float) -> int:
    if not total_time > 0 or not dt_fine > 0:
        raise DomainError(f"total_time and dt_fine must be > 0 (got {total_time}, {dt_fine})")
    steps = int(round(total_time / dt_fine))
    if steps < 1 or abs(steps * dt_fine - total_time) > 1e-9 * max(1.0, total_time):
        raise DomainError(f"total_time {total_time} is not a positive multiple of dt_fine {dt_fine}")
    return steps


def _a0(drift) -> np.ndarray:
    return drift.a0 if isinstance(drift, DriftMatrix) else as_matrix(drift, square=True)


def simulate_euler(drift, model: LevyModel, x0, total_time: float, rng, dt_fine: float = DT_FINE) -> Trajectory:
    """Euler-Maruyama path ``X_{k+1} = X_k - dt A0 X_k + dZ_k`` with a per-step jump ledger."""
    a0 = _a0(drift)
    d = a0.shape[0]
    x = np.array(x0, dtype=float).reshape(-1)
    if x.shape != (d,) or model.dim != d:
        raise DimensionError(f"x0 / model dimension does not match drift dimension {d}")
    steps = _steps_for(total_time, dt_fine)
    rng = as_rng_state(rng)
    totals, jumps = sample_increments(model, dt_fine, steps, rng)

    states = np.empty((steps + 1, d))
    states[0] = x
    limit = DIVERGENCE_NORM**2
    for k in range(steps):
        x = x - dt_fine * (a0 @ x) + totals[k]
        if not x @ x < limit:
            raise DivergenceError(
                f"state norm exceeded {DIVERGENCE_NORM:g} at step {k + 1}; drift is probably unstable"
            )
        states[k + 1] = x
    return Trajectory(dt_fine, states, jumps)


def simulate_euler_endpoints(drift, model: LevyModel, x0s, total_time: float, rng, dt_fine: float = DT_FINE) -> np.ndarray:
    """Endpoints of many independent Euler paths started at the rows of ``x0s``."""
    a0 = _a0(drift)
    x = np.array(x0s, dtype=float)
    if x.ndim != 2 or x.shape[1] != a0.shape[0]:
        raise DimensionError(f"x0s must have shape (m, {a0.shape[0]})")
    steps = _steps_for(total_time, dt_fine)
    rng = as_rng_state(rng)
    m = x.shape[0]
    for _ in range(steps):
        totals, _ = sample_increments(model, dt_fine, m, rng)
        x = x - dt_fine * (x @ a0.T) + totals
    if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_NORM:
        raise DivergenceError("batch Euler simulation diverged")
    return x


def stationary_covariance(drift, model: LevyModel) -> np.ndarray:
    """C_inf solving ``A0 C + C A0^T = C_brownian + nu2``."""
    a0 = _a0(drift)
    return solve_lyapunov(a0, cov_brownian(model) + nu2_matrix(model))


def burn_in_time(drift, dt_fine: float = DT_FINE) -> float:
    a0 = _a0(drift)
    t = BURN_IN_TIME_CONSTANTS / min_real_eig(a0)
    return math.ceil(t / dt_fine) * dt_fine


def stationary_start(drift, model: LevyModel, rng, dt_fine: float = DT_FINE) -> np.ndarray:
    """A draw from (an approximation of) the invariant law.

    Gaussian models use the exact law N(0, C_inf); jump models run an Euler
    burn-in of ten slowest time constants from the origin.
    """
    a0 = _a0(drift)
    d = a0.shape[0]
    rng = as_rng_state(rng)
    if model.is_zero:
        return np.zeros(d)
    if model.is_gaussian:
        factor = psd_sqrt_factor(stationary_covariance(a0, model))
        return factor @ rng.gauss.standard_normal(d)
    traj = simulate_euler(a0, model, np.zeros(d), burn_in_time(a0, dt_fine), rng, dt_fine)
    return np.array(traj.states[-1])


def subsample(traj: Trajectory, n: int) -> ObservationSet:
    """``n + 1`` approximately equidistant observations of a fine-grid path.

    Observation k is the fine state with index ``round(k * steps / n)``.  The
    continuous-part increments subtract the ledger jumps of the fine steps that
    fall inside each observation window.
    """
    steps = traj.steps
    if n < 1:
        raise InsufficientDataError(f"need n >= 1 observation windows, got {n}")
    if n > steps:
        raise DomainError(f"cannot take {n} windows from {steps} fine steps")
    k = np.arange(n + 1)
    idx = (2 * k * steps + n) // (2 * n)
    obs = traj.states[idx]
    # idx is strictly increasing because n <= steps
    jump_sums = np.add.reduceat(traj.jumps, idx[:-1], axis=0)
    cont = np.diff(obs, axis=0) - jump_sums
    return ObservationSet(traj.total_time / n, obs, cont)


def exact_gaussian_transition(drift, model, x, dt: float, rng) -> np.ndarray:
    """Exact draw of ``X_{t+dt}`` given ``X_t = x`` for a Brownian-driven OU process.

    ``model`` is a :class:`LevyModel` without jumps or a diffusion factor Sigma.
    ``x`` may be a single d-vector or an (m, d) batch of starting points.
    """
    a0 = _a0(drift)
    if isinstance(model, LevyModel):
        if not model.is_gaussian:
            raise UnsupportedError("exact transitions are only available for pure-Brownian models")
        sigma = model.sigma
    else:
        sigma = as_matrix(model, square=True, name="sigma")
    if not dt >= 0:
        raise DomainError(f"dt must be >= 0, got {dt}")
    x = np.asarray(x, dtype=float)
    if dt == 0:
        return x.copy()
    rng = as_rng_state(rng)
    e = expm(-dt * a0)
    c_inf = solve_lyapunov(a0, sigma @ sigma.T)
    c_dt = c_inf - e @ c_inf @ e.T
    factor = psd_sqrt_factor(c_dt)
    d = a0.shape[0]
    if x.ndim == 1:
        return e @ x + factor @ rng.gauss.standard_normal(d)
    g = rng.gauss.standard_normal((x.shape[0], d))
    return x @ e.T + g @ factor.T
