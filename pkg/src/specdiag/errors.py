"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SpecDiagError(Exception):
    """Base class for all library errors."""


class NegativeEntry(SpecDiagError, ValueError):
    pass


class InsufficientSupport(SpecDiagError, ValueError):
    pass


class UnsupportedTail(SpecDiagError, ValueError):
    """The tail rule has no meaning for the requested operation."""


class NotNonincreasing(SpecDiagError, ValueError):
    pass


class IncompatibleTails(SpecDiagError, ValueError):
    pass


class UndecidableDepth(SpecDiagError):
    """A statement about indices beyond the computed depth cannot be certified."""


class LengthMismatch(SpecDiagError, ValueError):
    pass


class DimensionMismatch(SpecDiagError, ValueError):
    pass


class OutOfRange(SpecDiagError, ValueError):
    pass


class Infeasible(SpecDiagError, ValueError):
    """The requested witness does not exist."""

    def __init__(self, message: str, failed: list[str] | None = None):
        super().__init__(message)
        self.failed = failed or []


class NotMajorized(Infeasible):
    def __init__(self, message: str, k: int | str | None = None):
        super().__init__(message, [str(k)] if k is not None else None)
        self.k = k


class NotInteger(Infeasible):
    pass


class SearchExhausted(SpecDiagError):
    """No candidate splice step validated; ``log`` lists every candidate tried."""

    def __init__(self, message: str, log: list[dict] | None = None):
        super().__init__(message)
        self.log = log or []


class CaseMismatch(SpecDiagError, ValueError):
    pass


class NotUnitary(SpecDiagError, ValueError):
    pass


class PatternMismatch(SpecDiagError, ValueError):
    pass


class NoConvergence(SpecDiagError, ArithmeticError):
    pass


class OracleViolation(SpecDiagError, AssertionError):
    """A sampled diagonal broke a necessary condition. Must never happen."""
