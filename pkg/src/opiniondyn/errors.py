"""Exception types shared across the package."""


class OpinionDynError(Exception):
    """Base class for all package errors."""


class ValidationError(OpinionDynError, ValueError):
    """Structurally invalid input: bad matrix shape, broken invariant, bad flag."""


class NumericalError(OpinionDynError, ArithmeticError):
    """A numerical routine failed: no convergence, defective normalization, overflow."""


class AmbiguousSpectrumError(NumericalError):
    """The unit-eigenvalue cluster cannot be resolved at the requested tolerance."""
