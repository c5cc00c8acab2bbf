"""Exception hierarchy shared by the geometry, solver and report layers."""


class EHZError(Exception):
    """Base class for every error raised by this package."""


class PolytopeError(EHZError, ValueError):
    pass


class UnboundedError(PolytopeError):
    """The half-space normals do not positively span the ambient space."""


class EmptyInteriorError(PolytopeError):
    """No strictly feasible point exists."""


class DegenerateError(PolytopeError):
    """Too few facets, or input points that are not full-dimensional."""


class SingularMatrixError(PolytopeError):
    pass


class DimensionMismatchError(EHZError, ValueError):
    pass


class DimensionError(EHZError, ValueError):
    pass


class OddDimensionError(DimensionError):
    pass


class SchemaError(EHZError, ValueError):
    """Malformed polytope or report JSON; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class SolverError(EHZError):
    pass


class NoPositiveCandidateError(SolverError):
    pass


class SearchTooLargeError(SolverError):
    """The ordered-support enumeration would exceed the configured budget."""


class InfeasibleCandidateError(SolverError, ValueError):
    """A (order, beta) pair violates the constraint set.

    ``constraint`` is one of ``"nonnegativity"``, ``"heights"``, ``"normals"``
    and ``violation`` the size of the residual.
    """

    def __init__(self, constraint, violation):
        super().__init__(f"candidate violates {constraint} constraint by {violation:.3e}")
        self.constraint = constraint
        self.violation = violation


class NonpositiveQError(SolverError, ValueError):
    pass
