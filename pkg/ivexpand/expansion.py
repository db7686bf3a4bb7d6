"""
ivexpand — Taylor-style expansions of interval-valued functions

Single variable, about a with target x and n retained orders:

    f̂(x) ⊖gH { f̂(a) ⊕ (x−a)f̂′(a) ⊕ … ⊕ (x−a)ⁿ⁻¹/(n−1)! f̂⁽ⁿ⁻¹⁾(a) }
        ⊂ ∪_{θ∈[0,1]} (x−a)ⁿ(1−θ)ⁿ⁻¹/(n−1)! ⊙ f̂⁽ⁿ⁾(a + θ(x−a))

n variables reduce to one along γ(t) = a + t(x−a) with ĝ(t) = f̂(γ(t)); the
partial sum is written with gradient and Hessian terms (multi-index α with
coefficient ∂^α f̂(a)/α!), the remainder uses ĝ⁽ˢ⁾.

Remainder hulls are taken over a uniform θ grid: sampling-based, not rigorous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from ivexpand.calculus import (
    MAX_SERIES_ORDER,
    MAX_TENSOR_ORDER,
    MU_TOL,
    directional_derivs,
    gradient,
    hessian,
)
from ivexpand.errors import (
    BranchSwitchError,
    DerivativeUndefinedError,
    DomainError,
    ExpansionHypothesisError,
    HessianUndefinedError,
    InvalidArgumentError,
)
from ivexpand.funcexpr import TIE_TOL, Expr, PointLike, as_point, eval_interval, eval_series
from ivexpand.interval import (
    ZERO,
    Interval,
    add,
    gh_diff,
    hull,
    is_subset_within,
    magnitude,
    scalar_mul,
)
from ivexpand.jets import checked_pow

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

THETA_SAMPLES: int       = 257    # uniform θ grid incl. both ends
TERM_SAMPLES: int        = 33     # samples of the term functions along the segment
BASE_BOX_RADIUS: float   = 1e-3   # μ-monotonicity box around a, scaled by 1+|a|
BASE_BOX_SAMPLES: int    = 5
INCLUSION_PAD: float     = 1e-9   # relative padding of the remainder hull
SAMPLING_LABEL: str      = "sampling-based, non-rigorous"


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """One term (x−a)^α ⊙ coeff of an expansion."""

    alpha: tuple[int, ...]
    coeff: Interval

    @property
    def order(self) -> int:
        return sum(self.alpha)

    @property
    def axes(self) -> tuple[int, ...]:
        """1-based axes with repetition, e.g. α = (0, 2) → (2, 2)."""
        return tuple(i + 1 for i, k in enumerate(self.alpha) for _ in range(k))

    def monomial(self, x: Sequence[float], base: Sequence[float]) -> float:
        value = math.prod(checked_pow(xi - ai, k) for xi, ai, k in zip(x, base, self.alpha))
        if not math.isfinite(value):
            raise DomainError(f"monomial {self.alpha} at {tuple(x)} about {tuple(base)} overflows")
        return value

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "coeff": self.coeff.to_list()}


@dataclass(frozen=True)
class ExpansionPolynomial:
    """Partial sum about ``base`` plus an optional sampled remainder enclosure."""

    base: tuple[float, ...]
    terms: tuple[Term, ...]
    order: int                            # retained derivative orders (terms up to order−1)
    remainder: Optional[Interval] = None
    meta: dict = field(default_factory=dict, compare=False)
    warnings: tuple[str, ...] = ()

    @property
    def coefficients(self) -> list[Interval]:
        return [t.coeff for t in self.terms]

    def coefficient(self, alpha: Sequence[int]) -> Interval:
        alpha = tuple(alpha)
        for term in self.terms:
            if term.alpha == alpha:
                return term.coeff
        raise KeyError(alpha)

    def to_dict(self) -> dict:
        return {
            "base":      list(self.base),
            "terms":     [t.to_dict() for t in self.terms],
            "remainder": None if self.remainder is None else self.remainder.to_list(),
            "meta":      self.meta,
        }


@dataclass(frozen=True)
class EnclosureReport:
    """lhs = f̂(x) ⊖gH partial sum, rhs = remainder hull, included ⇔ lhs ⊆ rhs (padded)."""

    lhs: Interval
    rhs: Interval
    included: bool
    margin: float          # min(lhs.lo − rhs.lo, rhs.hi − lhs.hi); negative ⇒ outside
    theta_samples: int
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "lhs":           self.lhs.to_list(),
            "rhs":           self.rhs.to_list(),
            "included":      self.included,
            "margin":        self.margin,
            "theta_samples": self.theta_samples,
            "tolerance":     self.tolerance,
        }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _check_order(n: int, top: int, what: str) -> None:
    if not 1 <= n <= top:
        raise InvalidArgumentError(f"{what} must be in 1..{top}, got {n}")


def _monotone(values: np.ndarray) -> bool:
    steps = np.diff(values)
    tol = MU_TOL * (1.0 + float(np.max(np.abs(values))))
    return bool(np.all(steps >= -tol) or np.all(steps <= tol))


def _remainder_over_segment(
    e: Expr,
    a: np.ndarray,
    v: np.ndarray,
    n: int,
    theta_samples: int,
    unit_axis: bool,
    tie_tol: float,
) -> Interval:
    """
    Hull over θ of the remainder family along a + θ·v.

    ``unit_axis`` (single variable) evaluates f̂⁽ⁿ⁾ at a + θv and scales by
    vⁿ; otherwise ĝ⁽ⁿ⁾(θ) is taken directly along v.
    """
    if theta_samples < 2:
        raise InvalidArgumentError(f"theta_samples must be >= 2, got {theta_samples}")
    direction = np.ones_like(v) if unit_axis else v
    scale = checked_pow(float(v[0]), n) if unit_axis else 1.0
    base_signature = None
    switches: list[float] = []
    family: list[Interval] = []
    for theta in np.linspace(0.0, 1.0, theta_samples):
        series = eval_series(e, a + theta * v, direction, n, tie_tol)
        if base_signature is None:
            base_signature = series.signature
        if not series.branch_stable or series.signature != base_signature:
            switches.append(float(theta))
            continue
        weight = scale * (1.0 - theta) ** (n - 1) / math.factorial(n - 1)
        family.append(scalar_mul(weight, series.derivative(n)))
    if switches:
        raise BranchSwitchError(
            f"endpoint branch of {e.text} switches on the segment from {tuple(a.tolist())} "
            f"along {tuple(v.tolist())} at θ ≈ {switches[:5]}",
            locations=switches,
        )
    return hull(family)


def _term_spreads_unverified(e: Expr, a: np.ndarray, v: np.ndarray, n: int, tie_tol: float) -> list[int]:
    """
    Indices i (1..n) whose term function α_i ⊙ ĝ⁽ⁱ⁻¹⁾ has a spread that is not
    monotone along the segment. Spread of the i-th term at θ is
    (1−θ)^{i−1}·|c̄_{i−1} − c̲_{i−1}| with c the Taylor coefficients along v.
    """
    if not np.any(v):
        return []
    thetas = np.linspace(0.0, 1.0, TERM_SAMPLES)
    spreads = np.zeros((TERM_SAMPLES, n))
    for row, theta in enumerate(thetas):
        try:
            series = eval_series(e, a + theta * v, v, max(n - 1, 0), tie_tol)
        except DomainError:
            return list(range(1, n + 1))
        if not series.branch_stable:
            return list(range(1, n + 1))
        for i in range(1, n + 1):
            gap = abs(series.hi[i - 1] - series.lo[i - 1])
            spreads[row, i - 1] = (1.0 - theta) ** (i - 1) * gap
    return [i for i in range(1, n + 1) if not _monotone(spreads[:, i - 1])]


def _base_ladder_check(e: Expr, a: float, n: int, tie_tol: float) -> None:
    """Each f̂⁽ᵏ⁾, k < n, must keep its branch and be μ-monotone near a."""
    radius = BASE_BOX_RADIUS * (1.0 + abs(a))
    base = eval_series(e, [a], [1.0], n, tie_tol)
    spreads = np.zeros((BASE_BOX_SAMPLES, n))
    for row, t in enumerate(np.linspace(a - radius, a + radius, BASE_BOX_SAMPLES)):
        try:
            series = eval_series(e, [t], [1.0], n, tie_tol)
        except DomainError as exc:
            raise ExpansionHypothesisError(
                f"derivative ladder of {e.text} is not defined on a neighbourhood of a = {a}: {exc}",
                order=0,
            ) from exc
        if not series.branch_stable or series.signature != base.signature:
            raise ExpansionHypothesisError(
                f"endpoint branch of {e.text} is not frozen near a = {a} ({', '.join(series.tie_locations) or 'switch'})",
                order=0,
            )
        for k in range(n):
            spreads[row, k] = math.factorial(k) * abs(series.hi[k] - series.lo[k])
    for k in range(n):
        if not _monotone(spreads[:, k]):
            raise ExpansionHypothesisError(
                f"derivative of order {k} of {e.text} is not μ-monotone near a = {a}",
                order=k,
            )


def _attach_target(
    e: Expr,
    a: np.ndarray,
    x: np.ndarray,
    n: int,
    theta_samples: int,
    unit_axis: bool,
    tie_tol: float,
) -> tuple[Interval, dict, tuple[str, ...]]:
    v = x - a
    remainder = _remainder_over_segment(e, a, v, n, theta_samples, unit_axis, tie_tol)
    failing = _term_spreads_unverified(e, a, v, n, tie_tol)
    warnings: tuple[str, ...] = ()
    if failing:
        message = (
            f"formal expansion, hypotheses unverified: term functions {failing} of {e.text} "
            f"are not μ-monotone on the segment {tuple(a.tolist())} → {tuple(x.tolist())}"
        )
        logger.warning(message)
        warnings = (message,)
    meta = {
        "theta_samples":       theta_samples,
        "segment":             [a.tolist(), x.tolist()],
        "sampling":            SAMPLING_LABEL,
        "hypotheses_verified": not failing,
    }
    return remainder, meta, warnings


# ---------------------------------------------------------------------------
# Single variable
# ---------------------------------------------------------------------------


def remainder_hull(
    e: Expr,
    a: float,
    x: float,
    n: int,
    theta_samples: int = THETA_SAMPLES,
    tie_tol: float = TIE_TOL,
) -> Interval:
    """∪_θ (x−a)ⁿ(1−θ)ⁿ⁻¹/(n−1)! ⊙ f̂⁽ⁿ⁾(a + θ(x−a)), sampled on a θ grid."""
    if e.arity != 1:
        raise InvalidArgumentError(f"remainder_hull needs a single-variable expression, got arity {e.arity}")
    _check_order(n, MAX_SERIES_ORDER, "order n")
    a_vec = np.array([float(a)])
    x_vec = np.array([float(x)])
    return _remainder_over_segment(e, a_vec, x_vec - a_vec, n, theta_samples, True, tie_tol)


def taylor_1d(
    e: Expr,
    a: float,
    n: int,
    x: Optional[float] = None,
    theta_samples: int = THETA_SAMPLES,
    tie_tol: float = TIE_TOL,
) -> ExpansionPolynomial:
    """
    Terms (1/k!)⊙f̂⁽ᵏ⁾(a), k = 0..n−1, of a single-variable expression.

    Exactly-zero terms of order k ≥ 1 are omitted. With a target ``x`` the
    remainder hull is attached and the term-function hypotheses are sampled
    along [a, x]; failing them only marks the result unverified.
    """
    if e.arity != 1:
        raise InvalidArgumentError(f"taylor_1d needs a single-variable expression, got arity {e.arity}")
    _check_order(n, MAX_SERIES_ORDER, "order n")
    a = float(a)

    ladder = directional_derivs(e, [a], [1.0], n, tie_tol)
    if not ladder.branch_stable:
        raise ExpansionHypothesisError(
            f"derivative ladder of {e.text} does not exist near a = {a}: endpoint branch switches",
            order=0,
        )
    _base_ladder_check(e, a, n, tie_tol)

    terms = []
    for k in range(n):
        coeff = scalar_mul(1.0 / math.factorial(k), ladder[k])
        if k == 0 or coeff != ZERO:
            terms.append(Term((k,), coeff))

    remainder, meta, warnings = None, {"sampling": SAMPLING_LABEL}, ()
    if x is not None:
        remainder, meta, warnings = _attach_target(
            e, np.array([a]), np.array([float(x)]), n, theta_samples, True, tie_tol
        )
    logger.info("Taylor 1d | {} | a={} | n={} | {} terms", e.text, a, n, len(terms))
    return ExpansionPolynomial((a,), tuple(terms), n, remainder, meta, warnings)


# ---------------------------------------------------------------------------
# n variables
# ---------------------------------------------------------------------------


def _unit(n: int, *axes: int) -> tuple[int, ...]:
    alpha = [0] * n
    for axis in axes:
        alpha[axis] += 1
    return tuple(alpha)


def taylor_nd(
    e: Expr,
    a: PointLike,
    x: Optional[PointLike] = None,
    s: int = 3,
    theta_samples: int = THETA_SAMPLES,
    tie_tol: float = TIE_TOL,
) -> ExpansionPolynomial:
    """
    Tensor-form partial sum of orders 0..s−1 about ``a`` (s ≤ 3).

    All multi-indices are kept, zero coefficients included. The remainder
    comes from ĝ(t) = f̂(a + t(x−a)) with n = s.
    """
    _check_order(s, MAX_TENSOR_ORDER, "order s")
    point = as_point(a, e.arity)
    n = e.arity

    terms = [Term(_unit(n), eval_interval(e, point))]
    try:
        if s >= 2:
            grad = gradient(e, point, tie_tol)
            terms.extend(Term(_unit(n, i), grad[i]) for i in range(n))
    except DerivativeUndefinedError as exc:
        raise ExpansionHypothesisError(f"gradient of {e.text} does not exist at {point.coords}: {exc}", order=1) from exc
    try:
        if s >= 3:
            h = hessian(e, point, tie_tol)
            for i in range(n):
                for j in range(i, n):
                    coeff = scalar_mul(0.5, h[i, i]) if i == j else h[i, j]
                    terms.append(Term(_unit(n, i, j), coeff))
    except (HessianUndefinedError, DerivativeUndefinedError) as exc:
        raise ExpansionHypothesisError(f"Hessian of {e.text} does not exist at {point.coords}: {exc}", order=2) from exc

    remainder, meta, warnings = None, {"sampling": SAMPLING_LABEL}, ()
    if x is not None:
        target = as_point(x, n)
        remainder, meta, warnings = _attach_target(
            e, np.asarray(point.coords), np.asarray(target.coords), s, theta_samples, False, tie_tol
        )
    logger.info("Taylor nd | {} | a={} | s={} | {} terms", e.text, point.coords, s, len(terms))
    return ExpansionPolynomial(point.coords, tuple(terms), s, remainder, meta, warnings)


# ---------------------------------------------------------------------------
# Evaluation and diagnostics
# ---------------------------------------------------------------------------


def eval_polynomial(poly: ExpansionPolynomial, x: PointLike) -> Interval:
    """⊕ over terms of (monomial at x) ⊙ coefficient."""
    coords = np.atleast_1d(np.asarray(x, dtype=float)).tolist()
    if len(coords) != len(poly.base):
        raise InvalidArgumentError(f"point has {len(coords)} coordinates, polynomial base has {len(poly.base)}")
    total = ZERO
    for term in poly.terms:
        total = add(total, scalar_mul(term.monomial(coords, poly.base), term.coeff))
    return total


def term_groups(poly: ExpansionPolynomial, x: PointLike) -> dict[int, Interval]:
    """⊕-sum of the terms of each total order at x."""
    coords = np.atleast_1d(np.asarray(x, dtype=float)).tolist()
    groups: dict[int, Interval] = {}
    for term in poly.terms:
        contribution = scalar_mul(term.monomial(coords, poly.base), term.coeff)
        groups[term.order] = add(groups.get(term.order, ZERO), contribution)
    return groups


def _enclosure(lhs: Interval, rhs: Interval, theta_samples: int) -> EnclosureReport:
    tol = INCLUSION_PAD * (1.0 + magnitude(rhs))
    return EnclosureReport(
        lhs=lhs,
        rhs=rhs,
        included=is_subset_within(lhs, rhs, tol),
        margin=min(lhs.lo - rhs.lo, rhs.hi - lhs.hi),
        theta_samples=theta_samples,
        tolerance=tol,
    )


def enclosure_1d(
    e: Expr,
    a: float,
    x: float,
    n: int,
    theta_samples: int = THETA_SAMPLES,
) -> EnclosureReport:
    poly = taylor_1d(e, a, n, x=x, theta_samples=theta_samples)
    lhs = gh_diff(eval_interval(e, [x]), eval_polynomial(poly, [x]))
    return _enclosure(lhs, poly.remainder, theta_samples)


def enclosure_nd(
    e: Expr,
    a: PointLike,
    x: PointLike,
    s: int,
    theta_samples: int = THETA_SAMPLES,
) -> EnclosureReport:
    poly = taylor_nd(e, a, x=x, s=s, theta_samples=theta_samples)
    lhs = gh_diff(eval_interval(e, x), eval_polynomial(poly, x))
    return _enclosure(lhs, poly.remainder, theta_samples)


def remainder_decay(
    e: Expr,
    a: float,
    x: float,
    n_max: int,
    theta_samples: int = THETA_SAMPLES,
) -> list[tuple[int, float]]:
    """(n, ‖remainder hull‖) for n = 1..n_max."""
    _check_order(n_max, MAX_SERIES_ORDER, "n_max")
    sequence = [(n, magnitude(remainder_hull(e, a, x, n, theta_samples))) for n in range(1, n_max + 1)]
    logger.info("Remainder decay | {} | a={} x={} | first={:.3e} last={:.3e}", e.text, a, x, sequence[0][1], sequence[-1][1])
    return sequence


def remainder_decay_frame(
    e: Expr,
    a: float,
    x: float,
    n_max: int,
    theta_samples: int = THETA_SAMPLES,
) -> pd.DataFrame:
    """remainder_decay as a DataFrame with columns n and magnitude."""
    return pd.DataFrame(remainder_decay(e, a, x, n_max, theta_samples), columns=["n", "magnitude"])


# ---------------------------------------------------------------------------
# Smoke test
# ---------------------------------------------------------------------------

if __name__ == "__main__":
    import sys

    from ivexpand.funcexpr import parse

    logger.remove()
    logger.add(sys.stderr, level="INFO")

    ee = parse("exp([-1,2]*t)", 1)
    poly = taylor_1d(ee, 1.0, 3, x=1.5)
    for term in poly.terms:
        logger.info("  k={}  {}", term.order, term.coeff)
    report = enclosure_1d(ee, 1.0, 1.5, 3)
    if report.included:
        logger.success("EE inclusion PASSED — lhs {} ⊂ rhs {}", report.lhs, report.rhs)
    else:
        logger.error("EE inclusion FAILED — lhs {} rhs {}", report.lhs, report.rhs)
