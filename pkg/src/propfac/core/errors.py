"""Exceptions raised by propfac.

Every exception carries the exit code the CLI should terminate with:
2 for bad input, 3 for a computation that could not be completed.
"""


class PropfacError(Exception):
    exit_code = 3


class ArgumentError(PropfacError, ValueError):
    """Shape, dimension or arity mismatch; invalid parameters."""
    exit_code = 2


class SchemaError(ArgumentError):
    """Malformed JSON payload or unknown override key."""


class ComputationError(PropfacError):
    exit_code = 3


class NotFiniteError(ComputationError):
    """Group closure exceeded its order cap."""


class CapExceededError(ComputationError):
    """Degree search ran past its cap."""


class NotReflectionGroupError(ComputationError):
    """The invariant degree product cannot reach the group order."""

    def __init__(self, message: str, achieved_product: int):
        super().__init__(message)
        self.achieved_product = achieved_product


class NoPreimageError(ComputationError):
    """Newton iteration produced no converged root."""
