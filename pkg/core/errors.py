"""Exception types and process exit codes.

Value-level problems (wrong shapes, violated preconditions, bad documents)
are ValueError subclasses so callers can treat them as user errors.
InvariantViolation is reserved for internal consistency traps.
"""

EXIT_OK = 0
EXIT_VALIDATION = 3
EXIT_VERIFICATION = 4
EXIT_INTERNAL = 5


class ShapeError(ValueError):
    """Dimension, degree cap or vector length mismatch."""


class DomainError(ValueError):
    """An operation was called outside its domain."""


class NormalFormError(DomainError):
    """Metric value at the origin is not diag(eps)."""


class DocumentError(ValueError):
    """A loaded document violates a load-time invariant."""


class InvariantViolation(RuntimeError):
    """An identity the engine guarantees did not hold. Always a bug."""


class ConfigError(ValueError):
    """An environment setting could not be parsed."""
