"""Background driving Levy process: Brownian part plus compound-Poisson jumps."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, InfiniteMomentError
from .linalg import as_matrix
from .rng import RngState

JUMP_KINDS = ("none", "laplace", "pareto")


@dataclass(frozen=True)
class JumpSpec:
    """Compound-Poisson jump law.

    Each jump is a d-vector whose coordinates are drawn i.i.d. from a centred
    scalar law: Laplace(0, ``scale``) or a symmetric Pareto with tail index
    ``alpha`` and minimum magnitude ``x_min``.
    """

    kind: str = "none"
    intensity: float = 0.0
    scale: float = 1.0
    alpha: float = 4.5
    x_min: float = 1.0

    def __post_init__(self):
        if self.kind not in JUMP_KINDS:
            raise DomainError(f"unknown jump kind {self.kind!r}; expected one of {JUMP_KINDS}")
        if not self.intensity >= 0:
            raise DomainError(f"jump intensity must be >= 0, got {self.intensity}")
        if self.kind == "laplace" and not self.scale > 0:
            raise DomainError(f"Laplace scale must be > 0, got {self.scale}")
        if self.kind == "pareto":
            if not self.x_min > 0:
                raise DomainError(f"Pareto x_min must be > 0, got {self.x_min}")
            if not self.alpha > 2:
                raise InfiniteMomentError(
                    f"Pareto alpha = {self.alpha} <= 2 has no finite second moment"
                )

    @classmethod
    def none(cls) -> "JumpSpec":
        return cls()

    @classmethod
    def laplace(cls, scale: float = 1.0, intensity: float = 1.0) -> "JumpSpec":
        return cls(kind="laplace", intensity=intensity, scale=scale)

    @classmethod
    def pareto(cls, alpha: float = 4.5, x_min: float = 1.0, intensity: float = 1.0) -> "JumpSpec":
        return cls(kind="pareto", intensity=intensity, alpha=alpha, x_min=x_min)

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.intensity > 0

    def scalar_variance(self) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "laplace":
            return 2.0 * self.scale**2
        return self.x_min**2 * self.alpha / (self.alpha - 2.0)

    def draw(self, rng: np.random.Generator, k: int, d: int) -> np.ndarray:
        """``k`` jump vectors as a (k, d) array."""
        if k == 0 or self.kind == "none":
            return np.zeros((k, d))
        if self.kind == "laplace":
            return rng.laplace(0.0, self.scale, size=(k, d))
        # one (magnitude, sign) uniform pair per coordinate, drawn in a single call
        u = rng.random(size=(k, d, 2))
        mag = self.x_min * (1.0 - u[..., 0]) ** (-1.0 / self.alpha)
        return np.where(u[..., 1] < 0.5, -mag, mag)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "intensity": self.intensity}
        if self.kind == "laplace":
            out["scale"] = self.scale
        elif self.kind == "pareto":
            out.update(alpha=self.alpha, x_min=self.x_min)
        return out


@dataclass(frozen=True)
class LevyModel:
    """Square-integrable martingale Levy process ``Sigma W_t + J_t`` in dimension ``dim``."""

    dim: int
    sigma: np.ndarray
    jumps: JumpSpec = field(default_factory=JumpSpec)

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dimension must be >= 1, got {self.dim}")
        sigma = as_matrix(self.sigma, square=True, name="sigma")
        if sigma.shape[0] != self.dim:
            raise DimensionError(f"sigma is {sigma.shape}, dimension is {self.dim}")
        sigma = sigma.copy()
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def brownian(cls, dim: int, scale: float = 1.0, jumps: JumpSpec | None = None) -> "LevyModel":
        return cls(dim, scale * np.eye(dim), jumps or JumpSpec())

    @property
    def is_gaussian(self) -> bool:
        return not self.jumps.active

    @property
    def is_zero(self) -> bool:
        return self.is_gaussian and not np.any(self.sigma)


def cov_brownian(model: LevyModel) -> np.ndarray:
    """C = Sigma Sigma^T."""
    return model.sigma @ model.sigma.T


def nu2_matrix(model: LevyModel) -> np.ndarray:
    """Second-moment matrix of the Levy measure: intensity * Var(scalar law) * I."""
    return model.jumps.intensity * model.jumps.scalar_variance() * np.eye(model.dim)


def sample_increment(model: LevyModel, dt: float, rng: RngState) -> tuple[np.ndarray, np.ndarray]:
    """One increment of Z over a step ``dt``; returns ``(total, jump_part)``."""
    totals, jumps = sample_increments(model, dt, 1, rng)
    return totals[0], jumps[0]


def sample_increments(model: LevyModel, dt: float, steps: int, rng: RngState) -> tuple[np.ndarray, np.ndarray]:
    """``steps`` consecutive increments, identical to ``steps`` calls of :func:`sample_increment`.

    Returns ``(totals, jumps)``, both of shape (steps, d).
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    d = model.dim
    g = rng.gauss.standard_normal((steps, d))
    jumps = np.zeros((steps, d))
    if model.jumps.active and steps:
        counts = rng.counts.poisson(model.jumps.intensity * dt, size=steps)
        total_k = int(counts.sum())
        if total_k:
            sizes = model.jumps.draw(rng.sizes, total_k, d)
            owner = np.repeat(np.arange(steps), counts)
            np.add.at(jumps, owner, sizes)
    # row-wise product without BLAS so results do not depend on the batch size
    brownian = (np.sqrt(dt) * g)[:, None, :] * model.sigma[None, :, :]
    totals = brownian.sum(axis=2) + jumps
    return totals, jumps
