"""Exception types raised across the package."""

from __future__ import annotations


class SigmaGeometryError(Exception):
    """Base class for every error raised by sigma_geometry."""


class DomainError(SigmaGeometryError, ValueError):
    """A point does not belong to the domain of a space (wrong arity, bad label)."""


class PointInsideHole(DomainError):
    """A punctured-plane point lies strictly inside the removed disk."""


class NegativeSigma(SigmaGeometryError, ValueError):
    """The metric rho = sqrt(2 sigma) was requested for sigma < 0."""

    def __init__(self, value: float, message: str | None = None):
        self.value = value
        super().__init__(message or f"sigma = {value!r} < 0, the metric is imaginary")


class TriangleInequalityViolated(SigmaGeometryError, ValueError):
    pass


class ZeroVector(SigmaGeometryError, ValueError):
    """A vector entering a collinearity test has vanishing squared length."""


class ImaginaryArea(SigmaGeometryError, ValueError):
    """F_2 < 0, so the Hero area S_2 = sqrt(F_2)/2 is not real."""


class DegenerateBasis(SigmaGeometryError, ValueError):
    """The Gram determinant of a basis vanishes within tolerance."""


class BasisTooLarge(SigmaGeometryError, ValueError):
    pass


class DimensionExceedsCap(SigmaGeometryError):
    """Sampled points still escape the tube built at the maximal allowed order."""

    def __init__(self, max_dim: int, max_residual: float):
        self.max_dim = max_dim
        self.max_residual = max_residual
        super().__init__(
            f"points still escape the order-{max_dim} tube (max residual {max_residual:.3e})"
        )


class NonConvergence(SigmaGeometryError):
    def __init__(self, message: str, iterations: int = 0, grad_norm: float = float("nan")):
        self.iterations = iterations
        self.grad_norm = grad_norm
        super().__init__(message)


class ChartBoundary(SigmaGeometryError):
    """A geodesic iterate left the coordinate domain of the metric."""


class SingularMetric(SigmaGeometryError, ValueError):
    pass


class SingularMixed(SigmaGeometryError, ValueError):
    """The mixed second derivative matrix sigma_{ik'} is (numerically) singular."""


class ConfigError(SigmaGeometryError, ValueError):
    pass


class ExprError(SigmaGeometryError, ValueError):
    """Base class for metric-expression parse and evaluation errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}")


class UnknownFunction(ExprSyntaxError):
    pass


class VariableOutOfRange(ExprSyntaxError):
    pass


class EvalError(ExprError, ArithmeticError):
    def __init__(self, operator: str, operands: tuple, message: str = ""):
        self.operator = operator
        self.operands = operands
        detail = message or "domain error"
        super().__init__(f"{operator}{operands!r}: {detail}")


class DegenerateGeodesicWarning(UserWarning):
    """Emitted when sigma is returned for a pair joined by infinitely many geodesics."""
