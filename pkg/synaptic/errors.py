import numpy as np


class SynapticError(Exception):
    """Base class of all errors raised by this package."""


class NumericalFailure(SynapticError, np.linalg.LinAlgError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class DomainError(SynapticError, ValueError):
    """A scalar function is undefined on part of a spectrum."""


class PreconditionError(SynapticError, ValueError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class ValidationError(PreconditionError):
    """Input does not satisfy the invariant of the type it is meant to be."""

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class ResourceError(SynapticError, RuntimeError):
    pass


class InvariantViolation(SynapticError, RuntimeError):
    """A computed result fails a property it must have (numerical or logic fault)."""

    def __init__(self, check, residual=float("nan"), message=""):
        text = f"{check} violated (residual {residual:.3e})"
        if message:
            text += f": {message}"
        super().__init__(text)
        self.check = check
        self.residual = residual
