"""
ivexpand — Derivative carriers for endpoint functions

Two forward-mode carriers share one small algebra (+, −, ·, exp, ln, sqrt,
integer powers) so that the endpoint evaluator in ``funcexpr`` is written once:

  GradJet   value + gradient in ℝⁿ         (first-order, multivariate)
  Series    Taylor coefficients c₀..c_K   (order K, univariate along x = a + t·v)

Values are kept as Python floats and computed with exactly the same float
operations as ``ivexpand.interval`` so that jet values and interval endpoints
coincide bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

from ivexpand.errors import DomainError, InvalidArgumentError

AGREEMENT_TOL: float = 1e-9   # relative tolerance when comparing derivative parts


def _exp(x: float, where: str) -> float:
    try:
        return math.exp(x)
    except OverflowError as exc:
        raise DomainError(f"exp overflows at {where} value {x}") from exc


def checked_pow(x: float, k: int) -> float:
    """x**k, with float overflow reported as a DomainError."""
    try:
        return x ** k
    except OverflowError as exc:
        raise DomainError(f"{x}^{k} overflows") from exc


def _parts_agree(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
    return bool(np.all(np.abs(a - b) <= tol * scale))


# ---------------------------------------------------------------------------
# First order
# ---------------------------------------------------------------------------


class GradJet:
    """Value and gradient of a smooth real function at one point."""

    __slots__ = ("v", "d")

    def __init__(self, v: float, d: np.ndarray) -> None:
        self.v = float(v)
        self.d = d

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "GradJet":
        d = np.zeros(n)
        d[index] = 1.0
        return cls(value, d)

    def const(self, value: float) -> "GradJet":
        return GradJet(value, np.zeros_like(self.d))

    def derivs(self) -> np.ndarray:
        return self.d

    def agrees(self, other: "GradJet", tol: float = AGREEMENT_TOL) -> bool:
        return _parts_agree(self.d, other.d, tol)

    def __add__(self, other: "GradJet") -> "GradJet":
        return GradJet(self.v + other.v, self.d + other.d)

    def __sub__(self, other: "GradJet") -> "GradJet":
        return GradJet(self.v - other.v, self.d - other.d)

    def __neg__(self) -> "GradJet":
        return GradJet(-self.v, -self.d)

    def __mul__(self, other: "GradJet") -> "GradJet":
        return GradJet(self.v * other.v, self.v * other.d + other.v * self.d)

    def exp(self) -> "GradJet":
        ev = _exp(self.v, "jet")
        return GradJet(ev, ev * self.d)

    def log(self) -> "GradJet":
        if not self.v > 0.0:
            raise DomainError(f"ln requires a positive argument, got {self.v}")
        return GradJet(math.log(self.v), self.d / self.v)

    def sqrt(self) -> "GradJet":
        if self.v < 0.0:
            raise DomainError(f"sqrt requires a nonnegative argument, got {self.v}")
        root = math.sqrt(self.v)
        if root == 0.0:
            raise DomainError("sqrt is not differentiable at 0")
        return GradJet(root, self.d / (2.0 * root))

    def powi(self, k: int) -> "GradJet":
        if k == 0:
            return self.const(1.0)
        return GradJet(checked_pow(self.v, k), k * checked_pow(self.v, k - 1) * self.d)


# ---------------------------------------------------------------------------
# Taylor mode
# ---------------------------------------------------------------------------


class Series:
    """
    Truncated Taylor series c₀ + c₁t + … + c_K t^K.

    ``c[k]`` is the k-th Taylor coefficient, so the k-th derivative along the
    direction is ``k! · c[k]``.
    """

    __slots__ = ("v", "c")

    def __init__(self, v: float, c: np.ndarray) -> None:
        self.v = float(v)
        c[0] = self.v
        self.c = c

    @classmethod
    def variable(cls, value: float, slope: float, order: int) -> "Series":
        if order < 0:
            raise InvalidArgumentError(f"series order must be nonnegative, got {order}")
        c = np.zeros(order + 1)
        if order >= 1:
            c[1] = slope
        return cls(value, c)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def const(self, value: float) -> "Series":
        return Series(value, np.zeros_like(self.c))

    def derivs(self) -> np.ndarray:
        return self.c[1:]

    def agrees(self, other: "Series", tol: float = AGREEMENT_TOL) -> bool:
        return _parts_agree(self.c[1:], other.c[1:], tol)

    def __add__(self, other: "Series") -> "Series":
        return Series(self.v + other.v, self.c + other.c)

    def __sub__(self, other: "Series") -> "Series":
        return Series(self.v - other.v, self.c - other.c)

    def __neg__(self) -> "Series":
        return Series(-self.v, -self.c)

    def __mul__(self, other: "Series") -> "Series":
        c = np.convolve(self.c, other.c)[: len(self.c)]
        return Series(self.v * other.v, c)

    def exp(self) -> "Series":
        a = self.c
        e = np.zeros_like(a)
        e[0] = _exp(self.v, "series")
        weighted = np.arange(len(a)) * a
        for k in range(1, len(a)):
            e[k] = np.dot(weighted[1 : k + 1], e[k - 1 :: -1][:k]) / k
        return Series(e[0], e)

    def log(self) -> "Series":
        if not self.v > 0.0:
            raise DomainError(f"ln requires a positive argument, got {self.v}")
        a = self.c
        out = np.zeros_like(a)
        out[0] = math.log(self.v)
        for k in range(1, len(a)):
            j = np.arange(1, k)
            acc = np.dot(j * out[1:k], a[k - 1 : 0 : -1]) / k if k > 1 else 0.0
            out[k] = (a[k] - acc) / self.v
        return Series(out[0], out)

    def sqrt(self) -> "Series":
        if self.v < 0.0:
            raise DomainError(f"sqrt requires a nonnegative argument, got {self.v}")
        a = self.c
        root = math.sqrt(self.v)
        if root == 0.0:
            raise DomainError("sqrt is not differentiable at 0")
        out = np.zeros_like(a)
        out[0] = root
        for k in range(1, len(a)):
            acc = np.dot(out[1:k], out[k - 1 : 0 : -1]) if k > 1 else 0.0
            out[k] = (a[k] - acc) / (2.0 * root)
        return Series(root, out)

    def powi(self, k: int) -> "Series":
        if k == 0:
            return self.const(1.0)
        result, base, e = None, self, k
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        return Series(checked_pow(self.v, k), result.c.copy())
