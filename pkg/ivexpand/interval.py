"""
ivexpand — Closed-interval arithmetic

Value type for every function output, derivative and expansion coefficient.

Notation
--------
  â = [a̲, ā]            closed interval, a̲ ≤ ā
  [a₁ ∨ a₂]             bracket: [min{a₁,a₂}, max{a₁,a₂}]
  μ(â) = ā − a̲          spread
  â ⊖gH b̂               [min{a̲−b̲, ā−b̄}, max{a̲−b̲, ā−b̄}]
  ‖â‖ = max{|a̲|, |ā|}   magnitude

Arithmetic is plain IEEE floating point (no outward rounding). Inclusion tests
take an explicit absolute tolerance instead.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np

from ivexpand.errors import DomainError, InvalidArgumentError

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

DISPLAY_DIGITS: int = 6          # significant digits in human-readable output

UNARY_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "exp":  math.exp,
    "ln":   math.log,
    "sqrt": math.sqrt,
}

_REAL = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_INTERVAL_RE = re.compile(rf"^\s*\[\s*({_REAL})\s*,\s*({_REAL})\s*\]\s*$")


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lo, hi]; lo = hi represents a real number."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidArgumentError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise InvalidArgumentError(f"interval needs lo <= hi, got [{lo}, {hi}]")
        # + 0.0 folds -0.0 into 0.0 so serialization is sign-stable
        object.__setattr__(self, "lo", lo + 0.0)
        object.__setattr__(self, "hi", hi + 0.0)

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def __add__(self, other: "Interval") -> "Interval":
        return add(self, other)

    def __neg__(self) -> "Interval":
        return neg(self)

    def __rmul__(self, scalar: float) -> "Interval":
        return scalar_mul(scalar, self)

    def __str__(self) -> str:
        return format_interval(self)

    def to_list(self) -> list[float]:
        return [self.lo, self.hi]


ZERO = Interval(0.0, 0.0)


@dataclass(frozen=True)
class IntervalVector:
    """Fixed-length ordered tuple of intervals (e.g. a gH gradient)."""

    entries: tuple[Interval, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        for item in self.entries:
            if not isinstance(item, Interval):
                raise InvalidArgumentError(f"IntervalVector entries must be Interval, got {item!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> Interval:
        return self.entries[index]

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.entries)

    def to_list(self) -> list[list[float]]:
        return [item.to_list() for item in self.entries]


@dataclass(frozen=True)
class IntervalMatrix:
    """Rectangular grid of intervals (e.g. a gH Hessian). Indexed ``m[i, j]``."""

    rows: tuple[tuple[Interval, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.rows)
        widths = {len(row) for row in rows}
        if len(widths) > 1:
            raise InvalidArgumentError(f"IntervalMatrix rows must share one length, got {sorted(widths)}")
        object.__setattr__(self, "rows", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, index: tuple[int, int]) -> Interval:
        i, j = index
        return self.rows[i][j]

    def to_list(self) -> list[list[list[float]]]:
        return [[item.to_list() for item in row] for row in self.rows]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")
    return value


def degenerate(x: float) -> Interval:
    """x̂ = [x, x]."""
    return Interval(x, x)


def bracket(a1: float, a2: float) -> Interval:
    """[a₁ ∨ a₂] = [min{a₁,a₂}, max{a₁,a₂}]."""
    a1 = _finite(a1, "bracket argument")
    a2 = _finite(a2, "bracket argument")
    return Interval(min(a1, a2), max(a1, a2))


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


def spread(a: Interval) -> float:
    return a.hi - a.lo


def magnitude(a: Interval) -> float:
    return max(abs(a.lo), abs(a.hi))


def hausdorff(a: Interval, b: Interval) -> float:
    return max(abs(a.lo - b.lo), abs(a.hi - b.hi))


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------


def gh_diff(a: Interval, b: Interval) -> Interval:
    """Generalized Hukuhara difference â ⊖gH b̂."""
    d1 = a.lo - b.lo
    d2 = a.hi - b.hi
    return Interval(min(d1, d2), max(d1, d2))


def add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def neg(a: Interval) -> Interval:
    return Interval(-a.hi, -a.lo)


def scalar_mul(a: float, b: Interval) -> Interval:
    """a ⊙ b̂ with the sign case split of the real factor."""
    a = _finite(a, "scalar")
    if a == 0.0:
        return ZERO
    if a > 0.0:
        return Interval(a * b.lo, a * b.hi)
    return Interval(a * b.hi, a * b.lo)


def mul(a: Interval, b: Interval) -> Interval:
    # candidate order lo·lo, lo·hi, hi·lo, hi·hi
    products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(min(products), max(products))


def monotone_unary(func: str, a: Interval) -> Interval:
    """Image of â under an increasing map (exp, ln, sqrt)."""
    fn = UNARY_FUNCTIONS.get(func)
    if fn is None:
        raise InvalidArgumentError(f"unknown unary function {func!r}; expected one of {sorted(UNARY_FUNCTIONS)}")
    check_unary_domain(func, a.lo)
    try:
        return Interval(fn(a.lo), fn(a.hi))
    except OverflowError as exc:
        raise DomainError(f"{func} overflows on {a}") from exc


def check_unary_domain(func: str, x: float) -> None:
    if func == "ln" and not x > 0.0:
        raise DomainError(f"ln requires a positive argument, got lower endpoint {x}")
    if func == "sqrt" and x < 0.0:
        raise DomainError(f"sqrt requires a nonnegative argument, got lower endpoint {x}")


def int_pow(a: Interval, k: int) -> Interval:
    """Exact range {xᵏ : x ∈ â}."""
    if k < 0:
        raise InvalidArgumentError(f"exponent must be nonnegative, got {k}")
    if k == 0:
        return Interval(1.0, 1.0)
    try:
        lo_k, hi_k = a.lo ** k, a.hi ** k
    except OverflowError as exc:
        raise DomainError(f"{a}^{k} overflows") from exc
    if k % 2 == 1 or a.lo >= 0.0:
        return Interval(lo_k, hi_k)
    if a.hi <= 0.0:
        return Interval(hi_k, lo_k)
    return Interval(0.0, max(lo_k, hi_k))


# ---------------------------------------------------------------------------
# Sets
# ---------------------------------------------------------------------------


def hull(items: Iterable[Interval]) -> Interval:
    items = list(items)
    if not items:
        raise InvalidArgumentError("hull of an empty collection is undefined")
    return Interval(min(i.lo for i in items), max(i.hi for i in items))


def is_subset_within(a: Interval, b: Interval, tol: float = 0.0) -> bool:
    """â ⊆ b̂ with b̂ padded by the absolute tolerance ``tol`` on both sides."""
    if tol < 0.0:
        raise InvalidArgumentError(f"tolerance cannot be negative, got {tol}")
    return b.lo - tol <= a.lo and a.hi <= b.hi + tol


def linear_comb(
    coeffs: Union[Sequence[float], Sequence[Sequence[float]], np.ndarray],
    v: Union[IntervalVector, Sequence[Interval]],
) -> Union[Interval, IntervalVector]:
    """
    Real-linear combination of an interval vector.

    A coefficient vector p gives the interval pᵀq̂ = Σ pᵢ q̂ᵢ.
    An n×m coefficient matrix A gives the length-m vector Aᵀq̂ whose j-th entry
    is Σᵢ aᵢⱼ q̂ᵢ.
    """
    entries = list(v)
    matrix = np.asarray(coeffs, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise InvalidArgumentError("linear_comb coefficients must be finite")
    if matrix.ndim == 1:
        if matrix.shape[0] != len(entries):
            raise InvalidArgumentError(
                f"coefficient vector has length {matrix.shape[0]}, interval vector has {len(entries)}"
            )
        total = ZERO
        for p_i, q_i in zip(matrix.tolist(), entries):
            total = add(total, scalar_mul(p_i, q_i))
        return total
    if matrix.ndim == 2:
        if matrix.shape[0] != len(entries):
            raise InvalidArgumentError(
                f"coefficient matrix has {matrix.shape[0]} rows, interval vector has {len(entries)} entries"
            )
        columns = [linear_comb(matrix[:, j], entries) for j in range(matrix.shape[1])]
        return IntervalVector(tuple(columns))
    raise InvalidArgumentError(f"coefficients must be a vector or matrix, got ndim={matrix.ndim}")


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------


def format_interval(a: Interval, digits: int = DISPLAY_DIGITS) -> str:
    return f"[{a.lo:.{digits}g}, {a.hi:.{digits}g}]"


def parse_interval(text: str) -> Interval:
    """Parse the canonical ``[lo,hi]`` form."""
    match = _INTERVAL_RE.match(text)
    if match is None:
        raise InvalidArgumentError(f"expected an interval like [lo,hi], got {text!r}")
    return Interval(float(match.group(1)), float(match.group(2)))


def parse_box(text: str) -> list[Interval]:
    """Parse a semicolon-separated list of intervals, e.g. ``[0,1];[0,2]``."""
    parts = [part for part in text.split(";") if part.strip()]
    if not parts:
        raise InvalidArgumentError(f"expected at least one interval, got {text!r}")
    return [parse_interval(part) for part in parts]
