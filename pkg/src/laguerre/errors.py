"""Exception and warning types shared across the package."""


class LaguerreError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(LaguerreError):
    """Invalid model or run configuration."""


class PoleError(LaguerreError):
    """A gamma factor or Pochhammer denominator is genuinely singular."""


class DivergenceError(LaguerreError):
    """Hypergeometric series outside its convergence domain."""


class NonConvergedError(LaguerreError):
    """Series or iteration failed to reach the requested tolerance."""

    def __init__(self, message, value=None, tail=None):
        super().__init__(message)
        self.value = value
        self.tail = tail


class DomainError(LaguerreError):
    """Arguments outside the mathematical domain of a law."""


class QuadratureError(LaguerreError):
    """Requested quadrature tolerance unattainable within the subdivision cap."""


class CollisionError(LaguerreError):
    """Eigenvalue gap collapsed and drift taming failed (diagnostic)."""


class GridMismatchError(LaguerreError):
    """Two paths do not share the same time grid."""


class SingularStateError(LaguerreError):
    """A path state is numerically singular where positive definiteness is required."""


class DegenerateSpectrumWarning(UserWarning):
    """Nearly equal eigenvalues forced the symmetric-perturbation fallback."""
