"""Exception types raised across the package."""


class TNNRError(Exception):
    """Base class for all package errors."""


class ShapeError(TNNRError, ValueError):
    """Operand dimensions are incompatible."""


class DomainError(TNNRError, ValueError):
    """A scalar argument lies outside the function's domain."""


class ConfigError(TNNRError, ValueError):
    """Invalid parameters for a penalty, weight scheme, solver or data generator."""


class SpectralConsistencyError(TNNRError, ArithmeticError):
    """A spectral tensor lost the conjugate symmetry of a real signal."""


class NumericalError(TNNRError, ArithmeticError):
    """A numerical kernel (e.g. an SVD) failed to converge."""

    def __init__(self, message, slice_index=None):
        super().__init__(message)
        self.slice_index = slice_index


class DivergenceError(TNNRError, ArithmeticError):
    """The solver produced a non-finite or exploding objective.

    The partial convergence trace is attached as ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
