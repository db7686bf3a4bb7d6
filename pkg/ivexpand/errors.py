"""
ivexpand — Exception hierarchy

Two families:

  * **InvalidArgumentError** and subclasses: the caller handed us something we
    cannot work with (malformed text, wrong dimension, outside a function's
    domain). The CLI maps these to exit code 2.
  * **MathematicalError** and subclasses: the input was fine, but the object
    asked for does not exist or a theorem hypothesis does not hold at the
    requested point. The CLI maps these to exit code 3.
"""

from __future__ import annotations

from typing import Optional, Sequence


class IvexpandError(Exception):
    """Root of every error raised by the package."""


# ---------------------------------------------------------------------------
# Input errors
# ---------------------------------------------------------------------------


class InvalidArgumentError(IvexpandError, ValueError):
    """Bad argument: non-finite real, empty hull, dimension mismatch, ..."""


class ParseError(InvalidArgumentError):
    """Expression text does not conform to the grammar."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line   = line
        self.column = column


class DomainError(InvalidArgumentError):
    """A unary function was applied outside its domain (or overflowed)."""


# ---------------------------------------------------------------------------
# Mathematical failures
# ---------------------------------------------------------------------------


class MathematicalError(IvexpandError):
    """The requested derivative / expansion does not exist at this point."""


class DerivativeUndefinedError(MathematicalError):
    """Left and right gH difference-quotient limits disagree."""

    def __init__(self, message: str, left=None, right=None) -> None:
        super().__init__(message)
        self.left  = left    # Interval | None
        self.right = right   # Interval | None


class HessianUndefinedError(MathematicalError):
    """Branch instability survives the finite-difference fallback."""


class PreconditionViolatedError(MathematicalError):
    """A μ-monotonicity precondition of a derivative rule does not hold."""


class ExpansionHypothesisError(MathematicalError):
    """Derivative ladder missing or a derivative is not μ-monotone near the base."""

    def __init__(self, message: str, order: Optional[int] = None) -> None:
        super().__init__(message)
        self.order = order


class BranchSwitchError(MathematicalError):
    """Endpoint branch selection changes along a remainder segment."""

    def __init__(self, message: str, locations: Sequence[float] = ()) -> None:
        super().__init__(message)
        self.locations = list(locations)
