"""Exception types shared across the package."""


class FlockAdaptError(Exception):
    """Base class for all package errors."""


class TopologyError(FlockAdaptError, ValueError):
    """Malformed interaction topology or an operation it cannot support."""


class ValidationError(FlockAdaptError, ValueError):
    """A scenario, file, or argument violates a declared constraint."""


class NumericError(FlockAdaptError, RuntimeError):
    """Integration or solving produced non-finite or unusable values."""


class AuditViolation(FlockAdaptError, AssertionError):
    """A recorded trace breaks one of the audited invariants."""
