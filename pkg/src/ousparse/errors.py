"""Exception hierarchy shared by all modules."""


class OusparseError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(OusparseError, ValueError):
    """Shapes of the inputs do not fit together."""


class DomainError(OusparseError, ValueError):
    """An argument lies outside the domain of the operation."""


class StabilityError(DomainError):
    """A drift matrix is not in M+ (some eigenvalue has non-positive real part)."""


class InfiniteMomentError(DomainError):
    """The jump law has no finite second moment."""


class InsufficientDataError(DomainError):
    """Too few observations for the requested procedure."""


class UnsupportedError(OusparseError, ValueError):
    """The operation is not defined for this kind of model or data."""


class DivergenceError(OusparseError, RuntimeError):
    """A simulation or optimisation produced runaway / non-finite values."""


class RankError(OusparseError, ValueError):
    """A design matrix is (numerically) singular."""


class ConfigError(OusparseError, ValueError):
    """Invalid scenario configuration. ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ReplayError(OusparseError, LookupError):
    """A replay request cannot be served (missing record or tampered run directory)."""
