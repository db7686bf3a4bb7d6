"""
ivexpand — gH calculus of interval-valued functions

Partial derivatives
-------------------
The gH partial derivative of f̂ at x with respect to xᵢ is the limit

    ∂f̂(x)/∂xᵢ = lim_{h→0} (1/h) ⊙ (f̂(x:ih) ⊖gH f̂(x))

Where the endpoint functions f̲, f̄ are smooth (no branch tie at x) this is
the bracket of the endpoint partials,

    ∂f̂(x)/∂xᵢ = [∂f̲(x)/∂xᵢ ∨ ∂f̄(x)/∂xᵢ]

which ``partial_gh`` reads off dual-endpoint AD. At branch ties the endpoint
partials may not exist while the gH partial still does; ``partial_numeric``
then decides existence from the left and right quotient limits.

μ-monotonicity
--------------
f̂ is μ-increasing along xᵢ when its spread μ_f̂ = f̄ − f̲ does not decrease
along xᵢ. Sampled via s(x) = ∂f̄/∂xᵢ − ∂f̲/∂xᵢ.

Higher orders
-------------
Mixed partials come from branch-frozen Taylor-mode series along a handful of
directions combined by polarization, so entry (i, j) and (j, i) are the same
number.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from ivexpand.errors import (
    DerivativeUndefinedError,
    DomainError,
    HessianUndefinedError,
    InvalidArgumentError,
    PreconditionViolatedError,
)
from ivexpand.funcexpr import (
    TIE_TOL,
    EvalPoint,
    Expr,
    PointLike,
    as_point,
    branch_stability,
    eval_dual,
    eval_interval,
    eval_series,
    grid_points,
    is_real_valued,
    perturb,
)
from ivexpand.interval import (
    Interval,
    IntervalMatrix,
    IntervalVector,
    bracket,
    gh_diff,
    hausdorff,
    linear_comb,
    magnitude,
    scalar_mul,
)

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

METHOD_AD: str      = "bracket-AD"
METHOD_NUMERIC: str = "numeric-gH-quotient"

H0_SCALE: float   = 1e-2     # first quotient step is H0_SCALE·(1+|pᵢ|)
HALVINGS: int     = 20       # steps h₀·2⁻ᵏ, k = 0..HALVINGS
CONV_TOL: float   = 1e-7     # left/right limit agreement, relative to 1+magnitude

SHRINK_RADIUS: float = 1e-2  # largest neighbourhood radius, scaled by 1+|pᵢ|
SHRINK_FACTOR: float = 10.0  # radius ratio between consecutive levels
SHRINK_LEVELS: int   = 3
SHRINK_SAMPLES: int  = 5     # per axis

HESSIAN_FD_STEP: float = 1e-5   # fallback central-difference step, scaled by 1+|pⱼ|

MU_TOL: float         = 1e-10   # sign tolerance, scaled by 1 + max|s|
BISECTION_STEPS: int  = 40
DEFAULT_MU_GRID: int  = 9
PRODUCT_BOX_RADIUS: float = 1e-3   # μ-monotonicity box for the product rule

MAX_SERIES_ORDER: int = 16      # Taylor-mode series length (directional ladders)
MAX_TENSOR_ORDER: int = 3

MU_INCREASING: str     = "mu-increasing"
MU_DECREASING: str     = "mu-decreasing"
NON_MU_MONOTONIC: str  = "non-mu-monotonic"
UNKNOWN: str           = "unknown"

CONSTANT_SPREAD_NOTE: str = "spread is constant along the axis"


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialResult:
    """One gH partial derivative and how it was obtained."""

    value: Interval
    method: str                                        # METHOD_AD | METHOD_NUMERIC
    branch_stable: bool
    lateral: Optional[tuple[Interval, Interval]] = None   # (left limit, right limit)
    endpoint_slopes: Optional[dict[str, float]] = None    # one-sided slopes of f̲, f̄

    def to_dict(self) -> dict:
        return {
            "value":           self.value.to_list(),
            "method":          self.method,
            "branch_stable":   self.branch_stable,
            "lateral":         None if self.lateral is None else [i.to_list() for i in self.lateral],
            "endpoint_slopes": self.endpoint_slopes,
        }


@dataclass(frozen=True)
class DerivativeTensor:
    """Symmetric table of order-s gH partials, keyed by sorted 1-based axis tuples."""

    order: int
    arity: int
    entries: dict[tuple[int, ...], Interval]
    branch_stable: bool
    tie_locations: tuple[str, ...] = ()

    def __getitem__(self, axes: Sequence[int]) -> Interval:
        return self.entries[tuple(sorted(axes))]

    def to_dict(self) -> dict:
        return {
            "order":         self.order,
            "branch_stable": self.branch_stable,
            "entries":       [{"axes": list(k), "value": v.to_list()} for k, v in self.entries.items()],
        }


@dataclass(frozen=True)
class DerivativeLadder:
    """ĝ⁽ᵏ⁾(0), k = 0..order, along a straight line through the base point."""

    values: tuple[Interval, ...]
    branch_stable: bool
    tie_locations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> Interval:
        return self.values[k]

    def __iter__(self):
        return iter(self.values)

    def to_dict(self) -> dict:
        return {
            "values":        [v.to_list() for v in self.values],
            "branch_stable": self.branch_stable,
            "tie_locations": list(self.tie_locations),
        }


@dataclass(frozen=True)
class MonotonicityReport:
    """Sampled μ-monotonicity verdict for one axis over a box."""

    axis: int
    verdict: str
    split_points: tuple[tuple[float, ...], ...]
    evidence_grid: int
    strict: bool = False
    stable_samples: int = 0
    notes: tuple[str, ...] = ()

    @property
    def is_monotone(self) -> bool:
        return self.verdict in (MU_INCREASING, MU_DECREASING)

    @property
    def is_constant_spread(self) -> bool:
        return CONSTANT_SPREAD_NOTE in self.notes

    def to_dict(self) -> dict:
        return {
            "axis":           self.axis,
            "verdict":        self.verdict,
            "split_points":   [list(p) for p in self.split_points],
            "evidence_grid":  self.evidence_grid,
            "strict":         self.strict,
            "stable_samples": self.stable_samples,
            "notes":          list(self.notes),
        }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _check_axis(e: Expr, i: int) -> None:
    if not 1 <= i <= e.arity:
        raise InvalidArgumentError(f"axis {i} out of range 1..{e.arity}")


def _extrapolate(sequence: np.ndarray) -> np.ndarray:
    """
    Two-level Richardson extrapolation of values taken at h₀·2⁻ᵏ.

    Each consecutive triple (q_k, q_{k+1}, q_{k+2}) gives
    R_k = (8q_{k+2} − 6q_{k+1} + q_k)/3, which cancels the O(h) and O(h²)
    terms. Returns the extrapolate at the point where consecutive R_k change
    least (truncation error has died out, round-off has not yet taken over).
    """
    r2 = (8.0 * sequence[2:] - 6.0 * sequence[1:-1] + sequence[:-2]) / 3.0
    change = np.max(np.abs(np.diff(r2, axis=0)), axis=1)
    return r2[int(np.argmin(change)) + 1]


def neighbourhood_stable(
    e: Expr,
    p: PointLike,
    order: int = 2,
    tie_tol: float = TIE_TOL,
) -> bool:
    """Branch stability on a shrinking box around ``p`` (first stable level wins)."""
    point = as_point(p, e.arity)
    for level in range(SHRINK_LEVELS):
        factor = SHRINK_RADIUS * SHRINK_FACTOR ** (-level)
        box = [Interval(x - factor * (1.0 + abs(x)), x + factor * (1.0 + abs(x))) for x in point.coords]
        if branch_stability(e, box, SHRINK_SAMPLES, order, tie_tol).stable:
            return True
    return False


# ---------------------------------------------------------------------------
# First-order partials
# ---------------------------------------------------------------------------


def partial_numeric(
    e: Expr,
    i: int,
    p: PointLike,
    h0: Optional[float] = None,
    halvings: int = HALVINGS,
    conv_tol: float = CONV_TOL,
) -> PartialResult:
    """
    gH partial from left and right difference-quotient limits.

    Parameters
    ----------
    e:
        Expression.
    i:
        Axis, 1-based.
    p:
        Evaluation point.
    h0:
        First step; defaults to ``H0_SCALE·(1+|pᵢ|)``.
    halvings:
        Number of step halvings (at least 3).
    conv_tol:
        Left and right limits must agree within ``conv_tol·(1+magnitude)``
        in Hausdorff distance.
    """
    _check_axis(e, i)
    if halvings < 3:
        raise InvalidArgumentError(f"need at least 3 halvings for extrapolation, got {halvings}")
    if conv_tol < 0.0:
        raise InvalidArgumentError(f"conv_tol cannot be negative, got {conv_tol}")
    point = as_point(p, e.arity)
    step = H0_SCALE * (1.0 + abs(point[i - 1])) if h0 is None else float(h0)
    if not step > 0.0:
        raise InvalidArgumentError(f"h0 must be positive, got {step}")

    f0 = eval_interval(e, point)
    limits: dict[int, Interval] = {}
    slopes: dict[int, np.ndarray] = {}
    for sign in (-1, 1):
        quotients, endpoint_slopes = [], []
        for k in range(halvings + 1):
            h = sign * step * 2.0 ** (-k)
            fh = eval_interval(e, perturb(point, i, h))
            q = scalar_mul(1.0 / h, gh_diff(fh, f0))
            quotients.append((q.lo, q.hi))
            endpoint_slopes.append(((fh.lo - f0.lo) / h, (fh.hi - f0.hi) / h))
        lo, hi = _extrapolate(np.asarray(quotients))
        limits[sign] = bracket(lo, hi)
        slopes[sign] = _extrapolate(np.asarray(endpoint_slopes))

    left, right = limits[-1], limits[1]
    gap = hausdorff(left, right)
    tol = conv_tol * (1.0 + max(magnitude(left), magnitude(right)))
    logger.debug("gH quotient | {} | axis={} | left={} right={} gap={:.3e}", e.text, i, left, right, gap)
    if gap > tol:
        raise DerivativeUndefinedError(
            f"gH partial of {e.text} w.r.t. x{i} at {point.coords} does not exist: "
            f"left limit {left} and right limit {right} differ by {gap:.3e}",
            left=left,
            right=right,
        )

    try:
        stable = eval_dual(e, point).branch_stable
    except DomainError:
        stable = False

    return PartialResult(
        value=Interval(0.5 * (left.lo + right.lo), 0.5 * (left.hi + right.hi)),
        method=METHOD_NUMERIC,
        branch_stable=stable,
        lateral=(left, right),
        endpoint_slopes={
            "lo_left":  float(slopes[-1][0]),
            "lo_right": float(slopes[1][0]),
            "hi_left":  float(slopes[-1][1]),
            "hi_right": float(slopes[1][1]),
        },
    )


def partial_gh(e: Expr, i: int, p: PointLike, tie_tol: float = TIE_TOL) -> PartialResult:
    """Bracket of endpoint partials, or the numeric quotient at a branch tie."""
    _check_axis(e, i)
    try:
        dual = eval_dual(e, p, tie_tol)
    except DomainError as exc:
        eval_interval(e, p)   # raises when f̂ itself is undefined at p
        logger.warning(
            "Endpoint derivatives of {} do not exist at {} ({}); using the numeric gH quotient for x{}",
            e.text, tuple(as_point(p, e.arity)), exc, i,
        )
        return replace(partial_numeric(e, i, p), branch_stable=False)
    if dual.branch_stable:
        return PartialResult(
            value=bracket(dual.lo_grad[i - 1], dual.hi_grad[i - 1]),
            method=METHOD_AD,
            branch_stable=True,
        )
    logger.warning(
        "Branch tie in {} at {} ({}); using the numeric gH quotient for x{}",
        e.text, tuple(as_point(p, e.arity)), ", ".join(dual.tie_locations), i,
    )
    return replace(partial_numeric(e, i, p), branch_stable=False)


def gradient(e: Expr, p: PointLike, tie_tol: float = TIE_TOL) -> IntervalVector:
    """∇f̂(p) = (∂f̂/∂x₁, …, ∂f̂/∂xₙ)ᵀ."""
    return IntervalVector(tuple(partial_gh(e, i, p, tie_tol).value for i in range(1, e.arity + 1)))


# ---------------------------------------------------------------------------
# Higher orders
# ---------------------------------------------------------------------------


def derivative_tensor(e: Expr, p: PointLike, order: int, tie_tol: float = TIE_TOL) -> DerivativeTensor:
    """
    All order-s gH partials at ``p`` with the branch frozen at ``p``.

    Each endpoint tensor entry is recovered by polarization:

        ∂ˢf/∂x_{i1}…∂x_{is} = Σ_{∅≠S⊆{1..s}} (−1)^{s−|S|} c_s(Σ_{j∈S} e_{ij})

    where c_s(w) is the s-th Taylor coefficient of t ↦ f(p + t·w).
    """
    if not 1 <= order <= MAX_TENSOR_ORDER:
        raise InvalidArgumentError(f"tensor order must be in 1..{MAX_TENSOR_ORDER}, got {order}")
    point = as_point(p, e.arity)
    n = e.arity
    cache: dict[tuple[float, ...], object] = {}
    stable = True
    ties: list[str] = []
    entries: dict[tuple[int, ...], Interval] = {}

    for axes in itertools.combinations_with_replacement(range(n), order):
        lo_sum = hi_sum = 0.0
        for size in range(1, order + 1):
            sign = (-1.0) ** (order - size)
            for subset in itertools.combinations(range(order), size):
                direction = np.zeros(n)
                for j in subset:
                    direction[axes[j]] += 1.0
                key = tuple(direction.tolist())
                if key not in cache:
                    cache[key] = eval_series(e, point, direction, order, tie_tol)
                series = cache[key]
                lo_sum += sign * series.lo[order]
                hi_sum += sign * series.hi[order]
                if not series.branch_stable:
                    stable = False
                    ties.extend(t for t in series.tie_locations if t not in ties)
        entries[tuple(a + 1 for a in axes)] = bracket(lo_sum, hi_sum)

    return DerivativeTensor(order, n, entries, stable, tuple(ties))


def _hessian_fallback(e: Expr, point: EvalPoint, tie_tol: float) -> IntervalMatrix:
    n = e.arity
    h_lo = np.zeros((n, n))
    h_hi = np.zeros((n, n))
    for j in range(n):
        h = HESSIAN_FD_STEP * (1.0 + abs(point[j]))
        plus = eval_dual(e, perturb(point, j + 1, h), tie_tol)
        minus = eval_dual(e, perturb(point, j + 1, -h), tie_tol)
        if not (plus.branch_stable and minus.branch_stable and plus.signature == minus.signature):
            raise HessianUndefinedError(
                f"Hessian of {e.text} at {point.coords} is undefined: endpoint branches switch along x{j + 1}"
            )
        h_lo[:, j] = (np.asarray(plus.lo_grad) - np.asarray(minus.lo_grad)) / (2.0 * h)
        h_hi[:, j] = (np.asarray(plus.hi_grad) - np.asarray(minus.hi_grad)) / (2.0 * h)
    h_lo = 0.5 * (h_lo + h_lo.T)
    h_hi = 0.5 * (h_hi + h_hi.T)
    return IntervalMatrix(tuple(tuple(bracket(h_lo[i, j], h_hi[i, j]) for j in range(n)) for i in range(n)))


def hessian(e: Expr, p: PointLike, tie_tol: float = TIE_TOL) -> IntervalMatrix:
    """n×n interval matrix of second gH partials."""
    point = as_point(p, e.arity)
    tensor = derivative_tensor(e, point, 2, tie_tol)
    if tensor.branch_stable and neighbourhood_stable(e, point, 2, tie_tol):
        n = e.arity
        return IntervalMatrix(tuple(tuple(tensor[(i, j)] for j in range(1, n + 1)) for i in range(1, n + 1)))
    logger.warning(
        "Hessian of {} at {}: endpoint branches not frozen ({}); falling back to differences of endpoint gradients",
        e.text, point.coords, ", ".join(tensor.tie_locations) or "neighbourhood switch",
    )
    return _hessian_fallback(e, point, tie_tol)


def _segment_stable(e: Expr, a: EvalPoint, v: np.ndarray, signature, tie_tol: float) -> bool:
    for level in range(SHRINK_LEVELS):
        delta = SHRINK_RADIUS * SHRINK_FACTOR ** (-level)
        same = True
        for t in np.linspace(delta / SHRINK_SAMPLES, delta, SHRINK_SAMPLES):
            try:
                dual = eval_dual(e, np.asarray(a.coords) + t * v, tie_tol)
            except DomainError:
                same = False
                break
            if not dual.branch_stable or dual.signature != signature:
                same = False
                break
        if same:
            return True
    return False


def directional_derivs(
    e: Expr,
    a: PointLike,
    v: Sequence[float],
    order: int,
    tie_tol: float = TIE_TOL,
) -> DerivativeLadder:
    """ĝ⁽ᵏ⁾(0) for ĝ(t) = f̂(a + t·v), k = 0..order, branch frozen at t = 0."""
    if not 0 <= order <= MAX_SERIES_ORDER:
        raise InvalidArgumentError(f"order must be in 0..{MAX_SERIES_ORDER}, got {order}")
    point = as_point(a, e.arity)
    direction = np.atleast_1d(np.asarray(v, dtype=float))
    series = eval_series(e, point, direction, order, tie_tol)
    values = tuple(series.derivative(k) for k in range(order + 1))

    stable = series.branch_stable and _segment_stable(e, point, direction, series.signature, tie_tol)
    warnings: tuple[str, ...] = ()
    if not stable:
        message = (
            f"endpoint branch of {e.text} switches on the segment from {point.coords} "
            f"along {tuple(direction.tolist())}; derivative ladder may not be the gH ladder"
        )
        logger.warning(message)
        warnings = (message,)
    return DerivativeLadder(values, stable, series.tie_locations, warnings)


# ---------------------------------------------------------------------------
# μ-monotonicity
# ---------------------------------------------------------------------------


class _SpreadSlope:
    """s(x) = ∂f̄/∂xᵢ − ∂f̲/∂xᵢ, or None where the endpoints are not smooth."""

    def __init__(self, e: Expr, i: int, tie_tol: float) -> None:
        self._e = e
        self._i = i
        self._tie_tol = tie_tol

    def __call__(self, point: Sequence[float]) -> Optional[float]:
        try:
            dual = eval_dual(self._e, point, self._tie_tol)
        except DomainError:
            return None
        if not dual.branch_stable:
            return None
        return dual.hi_grad[self._i - 1] - dual.lo_grad[self._i - 1]


def _bisect_split(slope: _SpreadSlope, base: list[float], axis: int, a: float, b: float, sign_a: float, tol: float):
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (a + b)
        base[axis] = mid
        s = slope(base)
        if s is None or abs(s) <= tol:
            return tuple(base)
        if math.copysign(1.0, s) == sign_a:
            a = mid
        else:
            b = mid
    base[axis] = 0.5 * (a + b)
    return tuple(base)


def mu_classify(
    e: Expr,
    i: int,
    box: Sequence[Interval],
    grid: int = DEFAULT_MU_GRID,
    tie_tol: float = TIE_TOL,
) -> MonotonicityReport:
    """
    Classify the spread μ_f̂ along axis ``i`` over ``box`` by the sign of
    ∂μ_f̂/∂xᵢ on a ``grid``ⁿ sample. Branch-unstable samples are left out of
    the sign test; fewer than half usable samples gives ``unknown``.
    """
    _check_axis(e, i)
    if grid < 3:
        raise InvalidArgumentError(f"grid must have at least 3 points per axis, got {grid}")
    if len(box) != e.arity:
        raise InvalidArgumentError(f"box has {len(box)} axes, expression arity is {e.arity}")

    slope = _SpreadSlope(e, i, tie_tol)
    points = grid_points(box, grid)
    values = {p: slope(p) for p in points}
    usable = [s for s in values.values() if s is not None]

    if 2 * len(usable) < len(points):
        logger.info("μ-classify | {} | axis={} | only {}/{} usable samples", e.text, i, len(usable), len(points))
        return MonotonicityReport(i, UNKNOWN, (), grid, False, len(usable), ("too few branch-stable samples",))

    tol = MU_TOL * (1.0 + max(abs(s) for s in usable))
    increasing = all(s >= -tol for s in usable)
    decreasing = all(s <= tol for s in usable)

    if increasing and decreasing:
        return MonotonicityReport(i, MU_INCREASING, (), grid, False, len(usable), (CONSTANT_SPREAD_NOTE,))
    if increasing:
        return MonotonicityReport(i, MU_INCREASING, (), grid, all(s > tol for s in usable), len(usable))
    if decreasing:
        return MonotonicityReport(i, MU_DECREASING, (), grid, all(s < -tol for s in usable), len(usable))

    # sign change: refine along every grid line parallel to axis i
    axis = i - 1
    axes = [np.linspace(b.lo, b.hi, grid).tolist() for b in box]
    others = [axes[k] if k != axis else [None] for k in range(e.arity)]
    splits: list[tuple[float, ...]] = []
    for fixed in itertools.product(*others):
        last_x, last_sign = None, 0.0
        for x in axes[axis]:
            point = list(fixed)
            point[axis] = x
            s = values.get(tuple(point))
            if s is None or abs(s) <= tol:
                continue
            sign = math.copysign(1.0, s)
            if last_x is not None and sign != last_sign:
                splits.append(_bisect_split(slope, list(point), axis, last_x, x, last_sign, tol))
            last_x, last_sign = x, sign

    logger.info("μ-classify | {} | axis={} | non-μ-monotonic | {} split points", e.text, i, len(splits))
    return MonotonicityReport(i, NON_MU_MONOTONIC, tuple(splits), grid, False, len(usable))


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


def inner_jacobian(
    e: Expr,
    inner: Sequence[Expr],
    a: PointLike,
    tie_tol: float = TIE_TOL,
) -> tuple[EvalPoint, tuple[float, ...], np.ndarray]:
    """(a, x₀ = u(a), Du(a)) for real-valued inner functions u feeding f̂; Du is n × m."""
    if len(inner) != e.arity:
        raise InvalidArgumentError(f"need {e.arity} inner expressions, got {len(inner)}")
    arities = {u.arity for u in inner}
    if len(arities) != 1:
        raise InvalidArgumentError(f"inner expressions must share one arity, got {sorted(arities)}")
    for u in inner:
        if not is_real_valued(u):
            raise InvalidArgumentError(f"inner expression {u.text} is not real-valued")
    point = as_point(a, arities.pop())
    x0 = tuple(eval_interval(u, point).lo for u in inner)
    du = np.array([eval_dual(u, point, tie_tol).lo_grad for u in inner])   # n × m
    return point, x0, du


def mixed_contributions(e: Expr, x0: tuple[float, ...], du: np.ndarray, tie_tol: float) -> list[int]:
    """Output coordinates whose terms uₖ′·∂μ/∂xₖ have both signs."""
    dual = eval_dual(e, x0, tie_tol)
    if not dual.branch_stable:
        return []
    spread_grad = np.asarray(dual.hi_grad) - np.asarray(dual.lo_grad)
    mixed = []
    for j in range(du.shape[1]):
        terms = du[:, j] * spread_grad
        tol = MU_TOL * (1.0 + float(np.max(np.abs(terms))))
        if np.any(terms > tol) and np.any(terms < -tol):
            mixed.append(j + 1)
    return mixed


def chain_gradient(
    e: Expr,
    inner: Sequence[Expr],
    a: PointLike,
    tie_tol: float = TIE_TOL,
) -> IntervalVector:
    """∇Ĝ(a) = Du(a)ᵀ ∇f̂(u(a)) for the composite Ĝ = f̂∘u with real-valued u."""
    point, x0, du = inner_jacobian(e, inner, a, tie_tol)
    grad = gradient(e, x0, tie_tol)
    mixed = mixed_contributions(e, x0, du, tie_tol)
    if mixed:
        logger.warning(
            "Chain rule for {} at {}: contributions to coordinates {} are differently μ-monotone; "
            "Du(a)ᵀ∇f̂ encloses but may exceed the composite derivative",
            e.text, point.coords, mixed,
        )
    return linear_comb(du, grad)


def chain_endpoint_gradients(
    e: Expr,
    inner: Sequence[Expr],
    a: PointLike,
    tie_tol: float = TIE_TOL,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """(Du(a)ᵀ∇f̲(x₀), Du(a)ᵀ∇f̄(x₀)): endpoint gradients of the composite."""
    point, x0, du = inner_jacobian(e, inner, a, tie_tol)
    dual = eval_dual(e, x0, tie_tol)
    if not dual.branch_stable:
        raise DerivativeUndefinedError(
            f"endpoint gradients of {e.text} do not exist at u(a) = {x0} ({', '.join(dual.tie_locations)})"
        )
    lo = du.T @ np.asarray(dual.lo_grad)
    hi = du.T @ np.asarray(dual.hi_grad)
    return tuple(lo.tolist()), tuple(hi.tolist())


def real_product_derivative(g: Expr, e: Expr, p: PointLike, tie_tol: float = TIE_TOL) -> Interval:
    """(g f̂)′(p) = [(g f̲)′(p) ∨ (g f̄)′(p)] for real g and μ-monotone f̂."""
    if g.arity != 1 or e.arity != 1:
        raise InvalidArgumentError(f"product rule needs single-variable expressions, got arities {g.arity} and {e.arity}")
    if not is_real_valued(g):
        raise InvalidArgumentError(f"multiplier {g.text} is not real-valued")
    point = as_point(p, 1)
    x = point[0]
    radius = PRODUCT_BOX_RADIUS * (1.0 + abs(x))
    report = mu_classify(e, 1, [Interval(x - radius, x + radius)], grid=5, tie_tol=tie_tol)
    if not report.is_monotone:
        raise PreconditionViolatedError(f"{e.text} is {report.verdict} near x = {x}; the product rule needs μ-monotonicity")

    fd = eval_dual(e, point, tie_tol)
    if not fd.branch_stable:
        raise PreconditionViolatedError(f"endpoint functions of {e.text} switch branch at x = {x}")
    gd = eval_dual(g, point, tie_tol)
    g0, g1 = gd.lo_val, gd.lo_grad[0]
    return bracket(g1 * fd.lo_val + g0 * fd.lo_grad[0], g1 * fd.hi_val + g0 * fd.hi_grad[0])


# ---------------------------------------------------------------------------
# Smoke test
# ---------------------------------------------------------------------------

if __name__ == "__main__":
    import sys

    from ivexpand.funcexpr import parse

    logger.remove()
    logger.add(sys.stderr, level="INFO")

    ef = parse("[-2,3]*x1*exp([-1,2]*x2)", 2)
    logger.info("EF gradient at (2,2): {}", [str(g) for g in gradient(ef, [2.0, 2.0])])

    note = parse("[1,2]*x1 + [0,1]*x2^2", 2)
    result = partial_gh(note, 1, [0.0, 0.0])
    logger.success("Note case: {} via {} | lateral {}", result.value, result.method, result.lateral)
