"""Exception hierarchy shared by every module."""

from fractions import Fraction
from typing import Optional, Union


class NorthcottError(Exception):
    """Base class for all errors raised by the toolkit."""

    pass


class PreconditionError(NorthcottError, ValueError):
    """An operation was called outside its documented domain."""

    pass


class InvalidParamsError(PreconditionError):
    """Construction parameters are out of range."""

    pass


class PrimeNotFoundError(NorthcottError):
    """A finite prime scan exhausted its interval."""

    def __init__(self, lo: Union[Fraction, str], hi: Union[Fraction, str], a: int, m: int):
        self.lo = lo
        self.hi = hi
        self.a = a
        self.m = m
        super().__init__(f"No prime p with {lo} < p < {hi} and p = {a} mod {m}")


class SearchExhaustedError(NorthcottError):
    """A constructor could not find a prime for one of its steps."""

    def __init__(self, step: int, d: int, window: str, reason: Optional[str] = None):
        self.step = step
        self.d = d
        self.window = window
        message = f"Step {step} (d={d}): no admissible prime in {window}"
        if reason:
            message += f" ({reason})"
        super().__init__(message)


class NonConvergenceError(NorthcottError):
    """An iterative numeric procedure failed to certify its result."""

    pass


class PrecisionFailureError(NorthcottError):
    """The precision ceiling was reached before a decision or width target."""

    pass


class ZeroElementError(PreconditionError):
    """A height was requested for the zero element."""

    pass


class ZeroTupleError(PreconditionError):
    """A point tuple has no nonzero entry where one is required."""

    pass


class IndeterminateError(NorthcottError):
    """Enclosures overlap, so a discrete quantity cannot be certified."""

    pass


class InvalidStepError(PreconditionError):
    """A step index does not name a valid step of the tower."""

    pass


class EmptyTowerError(PreconditionError):
    """The tower has no steps."""

    pass


class ElementSyntaxError(PreconditionError):
    """Element source text does not parse."""

    pass


class ExponentOutOfRangeError(PreconditionError):
    """A generator exponent reached its step degree."""

    pass


class UnknownVariableError(PreconditionError):
    """Element source text names a variable the tower does not have."""

    pass


class DegreeTooLargeError(PreconditionError):
    """A polynomial degree violates the bound of the operation."""

    pass


class NotInTopGeneratorError(PreconditionError):
    """The element does not involve the top generator of the tower."""

    pass


class TooLargeError(PreconditionError):
    """An enumeration exceeds the configured cap."""

    pass


class EmptyStreamError(NorthcottError):
    """An enumeration produced no elements."""

    pass


class MalformedCertificateError(NorthcottError):
    """A certificate does not match the schema."""

    pass
