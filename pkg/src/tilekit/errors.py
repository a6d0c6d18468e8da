"""Exception types shared across modules."""

from .cliques import CapacityError
from .graphcore import GraphError


class ParameterError(ValueError):
    """A documented precondition on numeric parameters does not hold."""


class InvariantError(AssertionError):
    """An internal invariant that the construction guarantees has failed."""


__all__ = ["CapacityError", "GraphError", "InvariantError", "ParameterError"]
