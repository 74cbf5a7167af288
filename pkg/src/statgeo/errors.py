"""Exception hierarchy shared by every statgeo module."""


class StatGeoError(Exception):
    """Base class for all statgeo failures."""


class UsageError(StatGeoError, ValueError):
    """Bad arguments or unmet preconditions supplied by the caller."""


class DomainError(StatGeoError):
    """A point (or a finite-difference stencil point) left the chart domain."""


class EvalError(StatGeoError):
    """A field returned a non-finite value."""


class ShapeError(StatGeoError, ValueError):
    pass


class SingularMetricError(StatGeoError):
    pass


class NotConvexError(StatGeoError):
    """Hessian of a potential is not positive definite."""


class StructureError(StatGeoError):
    """Input fails to be a statistical structure (or breaks a stated hypothesis)."""


class FitError(StatGeoError):
    pass


class QuadratureError(StatGeoError):
    pass


class ImmersionError(StatGeoError):
    pass


class DegenerateError(StatGeoError):
    pass


class TheoremViolation(StatGeoError):
    """A computed configuration contradicts a proven inequality."""
