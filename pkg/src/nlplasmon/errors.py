"""Exception and warning types raised across the package."""


class NLPlasmonError(Exception):
    """Base class for all package errors."""


class DomainError(NLPlasmonError, ValueError):
    """Argument outside the domain of a function."""


class SingularityError(NLPlasmonError, ZeroDivisionError):
    """Evaluation at a singular point (pole or branch point)."""


class ResonanceError(NLPlasmonError):
    """Evaluation on or too close to a resonance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConvergenceError(NLPlasmonError):
    """Iteration failed to converge; carries the last iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class HypothesisError(DomainError):
    """Input violates the hypothesis of an asymptotic statement."""


class MeshError(NLPlasmonError, ValueError):
    """Invalid or inconsistent surface mesh."""


class InconclusiveRankError(NLPlasmonError):
    """Singular-value gap too small to decide the numerical rank."""


class ContourError(NLPlasmonError):
    """Contour quadrature did not converge (contour too close to a pole)."""


class NonSimplePoleError(NLPlasmonError):
    """Pole is not simple; modal data is undefined."""


class ConfigError(NLPlasmonError, ValueError):
    """Invalid run configuration."""


class TruncationWarning(UserWarning):
    """Series truncated before reaching the requested tolerance."""


class MeshOrientationWarning(UserWarning):
    """Mesh orientation was flipped on load."""
