"""Exception types shared across the package."""


class FockLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(FockLabError, ValueError):
    """A cutoff or matrix dimension is out of the supported range."""


class DimensionMismatchError(FockLabError, ValueError):
    """Operands whose dimensions must agree do not."""


class ResourceLimitError(FockLabError):
    """A dense joint object would exceed the configured size limit."""


class NonHermitianError(FockLabError, ValueError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class EigensolverError(FockLabError):
    """The eigensolver failed to converge; carries a residual estimate."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PositivityError(FockLabError, ValueError):
    """A spectrum contains a negative eigenvalue beyond the clamp window."""


class DomainError(FockLabError, ValueError):
    """A scalar argument is outside the mathematical domain of the function."""


class TruncationError(FockLabError):
    """Truncation lost too much trace mass; carries the measured deficit."""

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class LemmaViolationError(FockLabError):
    """A scalar inequality that should hold on the grid failed; carries the point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SaturationViolationError(FockLabError):
    """A random state exceeded the thermal norm-ratio ceiling beyond tolerance."""


class ConfigError(FockLabError, ValueError):
    """A run configuration file or flag combination is invalid."""
