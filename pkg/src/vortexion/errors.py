"""Exception hierarchy shared by every module.

The CLI maps each family onto a process exit code, so new errors should
subclass one of the four families below rather than ``VortexionError``
directly.
"""


class VortexionError(Exception):
    """Base class for all package errors."""


class ParameterError(VortexionError, ValueError):
    """An argument lies outside the operation's domain."""


class NeutralityError(ParameterError):
    """A vortex configuration with non-zero total charge was supplied."""


class CoverageError(ParameterError):
    """A kernel table does not cover a requested displacement."""


class AmbiguousReadoutError(ParameterError):
    """A readout signal is too close to zero to decide its sign."""


class ConvergenceError(VortexionError, ArithmeticError):
    """An iterative procedure did not reach its tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ResolutionError(ConvergenceError):
    """A discretisation is too coarse for the requested accuracy."""


class TruncationError(ConvergenceError):
    """A basis cutoff leaks more weight than allowed."""


class CapacityError(VortexionError, MemoryError):
    """A Hilbert space exceeds the configured dimension limit."""


class CacheIntegrityError(VortexionError):
    """A kernel cache file is malformed or does not match its request."""
