"""Exception hierarchy shared by every module."""


class FranError(Exception):
    """Base class for all package errors."""


class DomainError(FranError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NonConvergence(FranError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget."""


class StabilityError(FranError, ValueError):
    """A queue is unstable (utilization at or above one)."""


class NumericalInconsistency(FranError, ArithmeticError):
    """A closed form produced a value outside its admissible range."""


class ParseError(FranError, ValueError):
    """A configuration file could not be parsed or has unknown keys."""


class ValidationError(FranError, ValueError):
    """A configuration value violates a documented invariant."""
