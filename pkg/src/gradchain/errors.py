"""Exception types shared across the package."""


class GradchainError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(GradchainError):
    """A model or configuration failed an admissibility or structural check."""


class ConfigError(GradchainError):
    """Malformed run configuration (bad JSON, inconsistent fields, ...)."""


class LatticeMismatchError(GradchainError):
    """Two lattice fields that must share (eps, N, bc) do not."""


class UnsupportedModelError(GradchainError):
    """An operation was asked to run outside its supported regime."""


class DivergenceError(GradchainError):
    """Time integration produced non-finite values."""


class InsufficientDataError(GradchainError):
    """Too few usable rows for a convergence-order fit."""
