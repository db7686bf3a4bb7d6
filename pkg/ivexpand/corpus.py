"""
ivexpand — Reference and generated expression corpora

Worked examples
---------------
  ee       exp([-1,2]·t)                 single variable, μ-increasing for t > 0
  ef       [-2,3]·x1·exp([-1,2]·x2)      gradient and Hessian at (2, 2)
  hessian  [1,2]·x1³·exp([1,2]·x2)       Hessian at (−1, −1)
  intro    [1,4]·x1² + [0,1]·x2          both partials at (1, 1)
  note     [1,2]·x1 + [0,1]·x2²          gH partial exists, endpoint partials do not
  square   [1,3]·t²                      mean-value example on [−1, 1]

Generated corpora
-----------------
Random trees over {+, ·, integer power ≤ 3, exp} of depth ≤ 4, no nested exp,
literals drawn from [−3, 3] and evaluation points from [−1, 1]. Each case
family rejects draws that hit a domain error, a branch tie or a value larger
than 10⁴ in magnitude. Every generator takes its own ``numpy`` Generator
seeded from the given 64-bit seed, so corpora are reproducible one by one.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from loguru import logger

from ivexpand.calculus import (
    H0_SCALE,
    PRODUCT_BOX_RADIUS,
    inner_jacobian,
    mixed_contributions,
    mu_classify,
)
from ivexpand.errors import DomainError, InvalidArgumentError, IvexpandError
from ivexpand.funcexpr import (
    TIE_TOL,
    Add,
    EvalPoint,
    Expr,
    IntervalLit,
    IntPow,
    Mul,
    Node,
    RealLit,
    Unary,
    Var,
    combine,
    eval_dual,
    eval_interval,
    is_real_valued,
    max_var_index,
    parse,
    substitute,
)
from ivexpand.interval import Interval, magnitude

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

DEFAULT_SEED: int = 0x5EED

MAX_DEPTH: int          = 4
MAX_POWER: int          = 3
LITERAL_RANGE: float    = 3.0
POINT_RANGE: float      = 1.0
LITERAL_DIGITS: int     = 2       # literals are rounded so their text form is short
LEAF_PROBABILITY: float = 0.3     # chance of stopping early above the depth limit
REAL_LITERAL_SHARE: float = 0.3   # share of literals that are real numbers

MAX_MAGNITUDE: float = 1e4
MIN_MULTIPLIER: float = 1e-2      # |g(p)| floor for generated product cases
MIN_SEGMENT: float    = 0.05      # shortest generated mean-value segment
SEGMENT_SAMPLES: int  = 257
NEIGHBOUR_LEVELS: int = 3         # p ± h₀·2⁻ᵏ, k = 0..2, must keep the branch signature

MAX_DRAWS_PER_CASE: int = 500

BRACKET_CASES: int = 200
MVT_CASES: int     = 100
CHAIN_CASES: int   = 50
PRODUCT_CASES: int = 50

_KINDS: tuple[str, ...] = ("add", "mul", "pow", "exp")


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorkedExample:
    """A named expression with its reference evaluation point."""

    name: str
    text: str
    arity: int
    point: tuple[float, ...]

    def expr(self) -> Expr:
        return parse(self.text, self.arity)

    def case(self) -> tuple[Expr, EvalPoint]:
        return self.expr(), EvalPoint(self.point)


EE      = WorkedExample("ee", "exp([-1,2]*t)", 1, (1.0,))
EF      = WorkedExample("ef", "[-2,3]*x1*exp([-1,2]*x2)", 2, (2.0, 2.0))
HESSIAN = WorkedExample("hessian", "[1,2]*x1^3*exp([1,2]*x2)", 2, (-1.0, -1.0))
INTRO   = WorkedExample("intro", "[1,4]*x1^2 + [0,1]*x2", 2, (1.0, 1.0))
NOTE    = WorkedExample("note", "[1,2]*x1 + [0,1]*x2^2", 2, (0.0, 0.0))
SQUARE  = WorkedExample("square", "[1,3]*t^2", 1, (0.0,))

# examples whose endpoint functions are smooth at the reference point
SMOOTH_EXAMPLES: tuple[WorkedExample, ...] = (EE, EF, HESSIAN, INTRO)


def reference_corpus() -> list[tuple[Expr, EvalPoint]]:
    return [example.case() for example in SMOOTH_EXAMPLES]


# ---------------------------------------------------------------------------
# Generated cases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MvtCase:
    expr: Expr
    alpha: float
    beta: float


@dataclass(frozen=True)
class ChainCase:
    outer: Expr
    inner: tuple[Expr, ...]
    point: tuple[float, ...]


@dataclass(frozen=True)
class ProductCase:
    multiplier: Expr
    expr: Expr
    point: tuple[float, ...]


class ExpressionGenerator:
    """Seeded random expression trees."""

    def __init__(self, seed: int = DEFAULT_SEED, max_depth: int = MAX_DEPTH) -> None:
        if max_depth < 1:
            raise InvalidArgumentError(f"max_depth must be >= 1, got {max_depth}")
        self.rng = np.random.default_rng(seed)
        self.max_depth = max_depth

    def _number(self) -> float:
        return round(float(self.rng.uniform(-LITERAL_RANGE, LITERAL_RANGE)), LITERAL_DIGITS)

    def _literal(self, real_only: bool) -> Node:
        if real_only or self.rng.random() < REAL_LITERAL_SHARE:
            return RealLit(self._number())
        a, b = self._number(), self._number()
        return IntervalLit(Interval(min(a, b), max(a, b)))

    def _leaf(self, arity: int, real_only: bool) -> Node:
        if self.rng.random() < 0.5:
            return Var(int(self.rng.integers(1, arity + 1)))
        return self._literal(real_only)

    def node(self, arity: int, depth: int, real_only: bool = False, allow_exp: bool = True) -> Node:
        """Tree of height ≤ ``depth``; exp never appears below another exp."""
        if depth <= 1 or self.rng.random() < LEAF_PROBABILITY:
            return self._leaf(arity, real_only)
        kinds = _KINDS if allow_exp else _KINDS[:-1]
        kind = kinds[int(self.rng.integers(len(kinds)))]
        if kind == "add":
            return Add(self.node(arity, depth - 1, real_only, allow_exp), self.node(arity, depth - 1, real_only, allow_exp))
        if kind == "mul":
            return Mul(self.node(arity, depth - 1, real_only, allow_exp), self.node(arity, depth - 1, real_only, allow_exp))
        if kind == "pow":
            return IntPow(self.node(arity, depth - 1, real_only, allow_exp), int(self.rng.integers(1, MAX_POWER + 1)))
        return Unary("exp", self.node(arity, depth - 1, real_only, allow_exp=False))

    def expr(self, arity: int, real_only: bool = False) -> Expr:
        """Random expression that mentions at least one variable."""
        for _ in range(MAX_DRAWS_PER_CASE):
            root = self.node(arity, self.max_depth, real_only)
            if max_var_index(root) > 0:
                return Expr(root, arity)
        raise IvexpandError(f"could not draw an expression of arity {arity} that uses a variable")

    def point(self, arity: int) -> tuple[float, ...]:
        return tuple(float(x) for x in self.rng.uniform(-POINT_RANGE, POINT_RANGE, size=arity))


def _bounded(e: Expr, p: Sequence[float]) -> bool:
    try:
        return magnitude(eval_interval(e, p)) <= MAX_MAGNITUDE
    except DomainError:
        return False


def _stable_around(e: Expr, p: Sequence[float]) -> bool:
    """No tie at ``p`` and the same branch at p ± h₀·2⁻ᵏ along every axis."""
    try:
        centre = eval_dual(e, p)
        if not centre.branch_stable or not _bounded(e, p):
            return False
        for axis in range(e.arity):
            h0 = H0_SCALE * (1.0 + abs(p[axis]))
            for level in range(NEIGHBOUR_LEVELS):
                for sign in (-1.0, 1.0):
                    q = list(p)
                    q[axis] += sign * h0 * 2.0 ** (-level)
                    if eval_dual(e, q).signature != centre.signature or not _bounded(e, q):
                        return False
    except DomainError:
        return False
    return True


def _collect(name: str, count: int, draw) -> list:
    cases, draws = [], 0
    while len(cases) < count:
        draws += 1
        if draws > count * MAX_DRAWS_PER_CASE:
            raise IvexpandError(f"{name}: only {len(cases)}/{count} admissible cases after {draws - 1} draws")
        case = draw()
        if case is not None:
            cases.append(case)
    logger.debug("{} corpus | {} cases from {} draws", name, count, draws)
    return cases


def generate_bracket_cases(count: int = BRACKET_CASES, seed: int = DEFAULT_SEED) -> list[tuple[Expr, EvalPoint]]:
    """Expressions of arity 1 or 2 with a branch-stable point in [−1, 1]ⁿ."""
    gen = ExpressionGenerator(seed)

    def draw():
        arity = int(gen.rng.integers(1, 3))
        e = gen.expr(arity)
        p = gen.point(arity)
        return (e, EvalPoint(p)) if _stable_around(e, p) else None

    return _collect("bracket", count, draw)


def generate_mvt_cases(count: int = MVT_CASES, seed: int = DEFAULT_SEED) -> list[MvtCase]:
    """Single-variable expressions with a segment [α, β] ⊂ [−1, 1] free of branch switches."""
    gen = ExpressionGenerator(seed)

    def draw():
        e = gen.expr(1)
        alpha, beta = sorted(gen.point(2))
        if beta - alpha < MIN_SEGMENT:
            return None
        signatures = set()
        try:
            for x in np.linspace(alpha, beta, SEGMENT_SAMPLES).tolist():
                dual = eval_dual(e, [x])
                if not dual.branch_stable or not _bounded(e, [x]):
                    return None
                signatures.add(dual.signature)
        except DomainError:
            return None
        return MvtCase(e, alpha, beta) if len(signatures) == 1 else None

    return _collect("mvt", count, draw)


def generate_chain_cases(count: int = CHAIN_CASES, seed: int = DEFAULT_SEED) -> list[ChainCase]:
    """f̂ of arity 2 composed with two real single-variable inner functions."""
    gen = ExpressionGenerator(seed)

    def draw():
        outer = gen.expr(2)
        inner = (gen.expr(1, real_only=True), gen.expr(1, real_only=True))
        a = gen.point(1)
        try:
            _, x0, du = inner_jacobian(outer, inner, a)
            if not eval_dual(outer, x0).branch_stable or mixed_contributions(outer, x0, du, TIE_TOL):
                return None
        except (DomainError, InvalidArgumentError):
            return None
        composite = substitute(outer, inner)
        return ChainCase(outer, inner, a) if _stable_around(composite, a) else None

    return _collect("chain", count, draw)


def generate_product_cases(count: int = PRODUCT_CASES, seed: int = DEFAULT_SEED) -> list[ProductCase]:
    """Real multiplier g times a μ-monotone f̂, both single-variable."""
    gen = ExpressionGenerator(seed)

    def draw():
        g = gen.expr(1, real_only=True)
        e = gen.expr(1)
        p = gen.point(1)
        x = p[0]
        try:
            if abs(eval_interval(g, p).lo) < MIN_MULTIPLIER:
                return None
            if not _stable_around(e, p) or not _stable_around(combine("mul", g, e), p):
                return None
            radius = PRODUCT_BOX_RADIUS * (1.0 + abs(x))
            if not mu_classify(e, 1, [Interval(x - radius, x + radius)], grid=5).is_monotone:
                return None
        except DomainError:
            return None
        return ProductCase(g, e, p)

    return _collect("product", count, draw)


# ---------------------------------------------------------------------------
# User corpora
# ---------------------------------------------------------------------------


def load_corpus(
    path: Union[str, Path],
    arity: int,
    seed: int = DEFAULT_SEED,
    points: Optional[Sequence[Sequence[float]]] = None,
) -> list[tuple[Expr, EvalPoint]]:
    """
    One expression per line (blank lines and ``#`` comments skipped). Each
    expression gets the matching entry of ``points`` or a seeded random point
    in [−1, 1]ⁿ.
    """
    source = Path(path)
    if not source.is_file():
        raise InvalidArgumentError(f"corpus file not found: {source}")
    lines = [ln.strip() for ln in source.read_text(encoding="utf-8").splitlines()]
    texts = [ln for ln in lines if ln and not ln.startswith("#")]
    if points is not None and len(points) != len(texts):
        raise InvalidArgumentError(f"corpus has {len(texts)} expressions but {len(points)} points were given")

    rng = np.random.default_rng(seed)
    cases = []
    for k, text in enumerate(texts):
        e = parse(text, arity)
        if points is not None:
            p = EvalPoint(tuple(points[k]))
        else:
            p = EvalPoint(tuple(rng.uniform(-POINT_RANGE, POINT_RANGE, size=arity).tolist()))
        cases.append((e, p))
    logger.info("Loaded {} expressions from {}", len(cases), source)
    return cases


# ---------------------------------------------------------------------------
# Smoke test
# ---------------------------------------------------------------------------

if __name__ == "__main__":
    import sys

    logger.remove()
    logger.add(sys.stderr, level="DEBUG")

    for e, p in generate_bracket_cases(5):
        logger.info("{} @ {} -> {}", e.text, p.coords, eval_interval(e, p))
    for case in generate_product_cases(3):
        logger.info("g={} f={} @ {} | real g: {}", case.multiplier.text, case.expr.text, case.point, is_real_valued(case.multiplier))
