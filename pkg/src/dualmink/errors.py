"""Exception types shared across the package."""


class DualMinkError(Exception):
    """Base class for all package errors."""


class DomainError(DualMinkError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class GeometryError(DualMinkError):
    """A body is unbounded, degenerate, or otherwise geometrically invalid."""


class CapabilityError(DualMinkError):
    """An input exceeds the documented desk-scale limits of an exact method."""


class EvaluationError(DualMinkError):
    """An integrand returned a non-finite value; carries the offending node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class SchemaError(DualMinkError, ValueError):
    """A JSON input file does not satisfy the documented format."""


class SubspaceMassViolation(DualMinkError):
    """A measure fails the subspace mass inequality gate; carries the report."""

    def __init__(self, report):
        super().__init__(
            "measure violates the subspace mass inequality "
            f"(margin {report.margin:.6g} at a {report.witness_dim}-dimensional subspace)"
        )
        self.report = report
