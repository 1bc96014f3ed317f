"""Exception types shared across the package."""


class EngineError(Exception):
    """Base class for computational failures raised by this package."""


class DomainError(EngineError, ValueError):
    """An argument lies outside its physically valid domain."""


class TruncationCapError(EngineError):
    """The level truncation search exceeded the configured hard ceiling.

    This signals a temperature too high for the current level cap, not a
    recoverable rounding problem.
    """


class UnphysicalCancellationError(EngineError):
    """An alternating-sign partition recursion lost every significant digit.

    Raised when the power-sum recursion for fermions produces a partition
    value with sign <= 0.  The value is positive in exact arithmetic, so a
    nonpositive sign means precision is exhausted; the caller should switch
    to the cancellation-free level recursion or refuse the parameters.
    """


class NoBracketError(EngineError):
    """A root scan found no usable sign change on its grid."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
