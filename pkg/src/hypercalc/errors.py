"""Exception types shared across the package.

Every error a module can raise is a subclass of HypercalcError, so the CLI
can turn any failure into a structured diagnostic (exit code 1) instead of
a traceback.
"""


class HypercalcError(Exception):
    """Base class for all library errors. May carry a source span."""

    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class ParseError(HypercalcError):
    pass


class DivisionByZeroError(HypercalcError):
    pass


class PoleError(HypercalcError):
    pass


class InfiniteArgumentError(HypercalcError):
    """Standard part requested for an element outside the finite galaxy."""


class UnsupportedFormError(HypercalcError):
    """Expression falls outside the representable/decidable fragment."""


class DependenceError(HypercalcError):
    """A sequence comparison or quotient that genuinely depends on the
    choice of free ultrafilter. Carries the per-parity candidates."""

    def __init__(self, message, candidates=None, span=None):
        super().__init__(message, span)
        self.candidates = candidates or {}


class DomainError(HypercalcError):
    pass


class KinkError(DomainError):
    """abs() differentiated at its corner."""


class NotIndeterminateError(HypercalcError):
    pass


class OrderExhaustedError(HypercalcError):
    pass


class SingularError(HypercalcError):
    pass


class FIPViolationError(HypercalcError):
    """A base family whose finite intersections reach the empty set."""


class NotAFilterError(HypercalcError):
    pass


class EmptyBaseSetError(HypercalcError):
    pass


class NoClosedFormError(HypercalcError):
    pass


class UnknownSumError(HypercalcError):
    pass


class BadIntervalError(HypercalcError):
    pass


class DepthCapError(HypercalcError):
    def __init__(self, message, last_gap=None, span=None):
        super().__init__(message, span)
        self.last_gap = last_gap


class UnboundedSampleError(HypercalcError):
    pass


class UnverifiableBoundsError(HypercalcError):
    pass


class AdditivityViolationError(HypercalcError):
    pass
