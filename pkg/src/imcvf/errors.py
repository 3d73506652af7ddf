"""Exception types shared across the package."""


class ImcvfError(Exception):
    """Base class for all package errors."""


class ExprSyntaxError(ImcvfError):
    """Malformed expression source.

    Carries the byte offset of the offending token and the set of token
    kinds that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.expected = frozenset(expected)


class UnknownIdentifierError(ExprSyntaxError):
    """Identifier is not a coordinate, constant, function or parameter."""


class EvalDomainError(ImcvfError):
    """Evaluation left the domain (division by zero, log of non-positive, ...)."""


class SingularMetricError(ImcvfError):
    """Metric determinant vanishes at the requested point."""


class DegenerateSurfaceError(ImcvfError):
    """Induced sphere metric is degenerate (ab - c^2 <= 0)."""


class NullMeanCurvatureError(ImcvfError):
    """<H, H> = 0: the inverse mean curvature vector is undefined."""


class NonSpacelikeMeanCurvatureError(ImcvfError):
    """Mean curvature vector is not spacelike (|H_r| <= |H_n|)."""


class NotAreaExpandingError(ImcvfError):
    """e_r(ab - c^2) <= 0: the surface is minimal in the slice, no steering."""


class GridTooCoarseError(ImcvfError):
    """Sphere grid is too coarse for the requested operation."""


class CompatibilityError(ImcvfError):
    """Poisson solvability integral is not zero within tolerance."""


class ConvergenceError(ImcvfError):
    """Iterative solver failed to converge; carries the iterate history."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
