"""
ivexpand — Interval-valued function expressions

Parses, prints and evaluates functions f̂: ℝⁿ → I(ℝ) written with interval
coefficients, e.g.

    [1,4]*x1^2 + [0,1]*x2
    [-2,3]*x1*exp([-1,2]*x2)

Grammar
-------
    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := base ("^" INT)?
    base   := NUMBER | "[" NUMBER "," NUMBER "]" | VAR
            | FUNC "(" expr ")" | "ghdiff" "(" expr "," expr ")" | "(" expr ")"
    VAR    := "x" INT | "t"            ("t" is x1)
    FUNC   := "exp" | "ln" | "sqrt"

A sign is part of a NUMBER only where an operand is expected, so ``x1 -1``
is a subtraction while ``x1 * -1`` multiplies by the literal −1.

Semantics
---------
  * every syntactic occurrence of an interval literal is an independent
    interval (no dependency tracking);
  * ``a - b`` means a ⊕ (−1)⊙b, never the gH-difference; the gH-difference is
    only available as ``ghdiff(a, b)``.

Endpoint evaluation
-------------------
``eval_dual`` and ``eval_series`` push a derivative carrier (see
``ivexpand.jets``) through both endpoints. Every min/max inside interval
arithmetic (scalar sign case, four-product mul, even powers, ghdiff) selects
one candidate by value and carries that candidate's derivatives. Candidates
whose values tie within ``tie_tol·(1+|v|)`` while their derivatives disagree
make the point branch-unstable; the node is reported in ``tie_locations``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from loguru import logger

from ivexpand.errors import DomainError, InvalidArgumentError, ParseError
from ivexpand.interval import (
    Interval,
    add,
    bracket,
    check_unary_domain,
    degenerate,
    gh_diff,
    int_pow,
    monotone_unary,
    mul,
    scalar_mul,
)
from ivexpand.jets import GradJet, Series

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

TIE_TOL: float = 1e-12                  # relative tie tolerance for branch selection
FUNCTIONS: tuple[str, ...] = ("exp", "ln", "sqrt")
BINARY_FUNCTIONS: tuple[str, ...] = ("ghdiff",)
DEFAULT_STABILITY_SAMPLES: int = 5      # per axis
DEFAULT_STABILITY_ORDER: int = 2        # derivative order that must be branch-smooth


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalLit:
    value: Interval


@dataclass(frozen=True)
class RealLit:
    value: float


@dataclass(frozen=True)
class Var:
    index: int   # 1-based


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class IntPow:
    base: "Node"
    k: int


@dataclass(frozen=True)
class Unary:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class GhDiff:
    left: "Node"
    right: "Node"


Node = Union[IntervalLit, RealLit, Var, Add, Sub, Mul, IntPow, Unary, GhDiff]


@dataclass(frozen=True)
class Expr:
    """Parsed interval-valued function of ``arity`` real variables."""

    root: Node
    arity: int
    text: str = field(default="", compare=False)
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise InvalidArgumentError(f"arity must be >= 1, got {self.arity}")
        top = max_var_index(self.root)
        if top > self.arity:
            raise InvalidArgumentError(f"variable x{top} exceeds arity {self.arity}")
        if not self.text:
            object.__setattr__(self, "text", to_text(self.root))

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class EvalPoint:
    """Finite point in ℝⁿ."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in self.coords)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidArgumentError(f"evaluation point must be finite, got {coords}")
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, index: int) -> float:
        return self.coords[index]


PointLike = Union[EvalPoint, Sequence[float], np.ndarray]


def as_point(p: PointLike, arity: int) -> EvalPoint:
    point = p if isinstance(p, EvalPoint) else EvalPoint(tuple(np.atleast_1d(np.asarray(p, dtype=float)).tolist()))
    if len(point) != arity:
        raise InvalidArgumentError(f"point has {len(point)} coordinates, expression arity is {arity}")
    return point


def perturb(p: PointLike, i: int, h: float) -> EvalPoint:
    """Copy of ``p`` with coordinate ``i`` (1-based) shifted by ``h``."""
    coords = list(p.coords if isinstance(p, EvalPoint) else np.atleast_1d(np.asarray(p, dtype=float)).tolist())
    if not 1 <= i <= len(coords):
        raise InvalidArgumentError(f"axis {i} out of range 1..{len(coords)}")
    coords[i - 1] += h
    return EvalPoint(tuple(coords))


# ---------------------------------------------------------------------------
# Structural helpers
# ---------------------------------------------------------------------------


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, (Add, Sub, Mul, GhDiff)):
        return (node.left, node.right)
    if isinstance(node, IntPow):
        return (node.base,)
    if isinstance(node, Unary):
        return (node.arg,)
    return ()


def max_var_index(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    return max((max_var_index(c) for c in children(node)), default=0)


def count_nodes(node: Node) -> int:
    return 1 + sum(count_nodes(c) for c in children(node))


@lru_cache(maxsize=4096)
def _is_real_node(node: Node) -> bool:
    if isinstance(node, IntervalLit):
        return node.value.is_degenerate
    return all(_is_real_node(c) for c in children(node))


def is_real_valued(e: Expr) -> bool:
    """True when no non-degenerate interval literal occurs, so f̲ = f̄."""
    return _is_real_node(e.root)


def substitute(e: Expr, inner: Sequence[Expr]) -> Expr:
    """Composite f̂∘u: replaces xᵢ by the i-th inner expression."""
    if len(inner) != e.arity:
        raise InvalidArgumentError(f"need {e.arity} inner expressions, got {len(inner)}")
    arities = {u.arity for u in inner}
    if len(arities) != 1:
        raise InvalidArgumentError(f"inner expressions must share one arity, got {sorted(arities)}")

    def _swap(node: Node) -> Node:
        if isinstance(node, Var):
            return inner[node.index - 1].root
        if isinstance(node, (Add, Sub, Mul, GhDiff)):
            return type(node)(_swap(node.left), _swap(node.right))
        if isinstance(node, IntPow):
            return IntPow(_swap(node.base), node.k)
        if isinstance(node, Unary):
            return Unary(node.func, _swap(node.arg))
        return node

    return Expr(_swap(e.root), arities.pop())


def combine(kind: str, left: Expr, right: Expr) -> Expr:
    """Build ``left ⊕ right``, ``ghdiff(left, right)`` or ``left * right``."""
    ctor = {"add": Add, "ghdiff": GhDiff, "mul": Mul}.get(kind)
    if ctor is None:
        raise InvalidArgumentError(f"unknown combination {kind!r}")
    return Expr(ctor(left.root, right.root), max(left.arity, right.arity))


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE  = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE    = re.compile(r"\d+")
_VAR_RE    = re.compile(r"x(\d+)")
_SYMBOLS   = set("+-*^()[],")


@dataclass(frozen=True)
class Token:
    kind: str    # "num" | "ident" | "sym" | "end"
    text: str
    pos: int


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    column = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, column


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        expects_operand = not tokens or (tokens[-1].kind == "sym" and tokens[-1].text not in ")]")
        signed = ch in "+-" and expects_operand
        if ch.isdigit() or ch == "." or signed:
            match = _NUMBER_RE.match(text, pos)
            if match is not None and (match.group(0)[0] not in "+-" or signed):
                tokens.append(Token("num", match.group(0), pos))
                pos = match.end()
                continue
        if ch in _SYMBOLS:
            tokens.append(Token("sym", ch, pos))
            pos += 1
            continue
        match = _IDENT_RE.match(text, pos)
        if match is not None:
            tokens.append(Token("ident", match.group(0), pos))
            pos = match.end()
            continue
        line, column = _line_col(text, pos)
        raise ParseError(f"unexpected character {ch!r}", line, column)
    tokens.append(Token("end", "", len(text)))
    return tokens


class Parser:
    """
    Recursive-descent parser for the expression grammar.

    Parameters
    ----------
    text:
        Source text.
    arity:
        Number of real variables; ``x{i}`` with i > arity is rejected.
    """

    def __init__(self, text: str, arity: int) -> None:
        if arity < 1:
            raise InvalidArgumentError(f"arity must be >= 1, got {arity}")
        self._text = text
        self._arity = arity
        self._tokens = tokenize(text)
        self._index = 0
        self.warnings: list[str] = []

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def parse(self) -> Expr:
        root = self._expr()
        tok = self._peek()
        if tok.kind != "end":
            self._fail(f"unexpected {tok.text!r} after expression", tok)
        expr = Expr(root, self._arity, self._text.strip(), tuple(self.warnings))
        logger.debug("Parsed expression | arity={} | nodes={} | {}", self._arity, count_nodes(root), expr.text)
        return expr

    # ------------------------------------------------------------------
    # Grammar rules
    # ------------------------------------------------------------------

    def _expr(self) -> Node:
        node = self._term()
        while self._peek().text in ("+", "-") and self._peek().kind == "sym":
            op = self._advance().text
            right = self._term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def _term(self) -> Node:
        node = self._factor()
        while self._peek().kind == "sym" and self._peek().text == "*":
            self._advance()
            node = Mul(node, self._factor())
        return node

    def _factor(self) -> Node:
        base = self._base()
        if self._peek().kind == "sym" and self._peek().text == "^":
            self._advance()
            tok = self._advance()
            if tok.kind != "num" or not _INT_RE.fullmatch(tok.text):
                self._fail(f"exponent must be a nonnegative integer, got {tok.text or 'end of input'!r}", tok)
            return IntPow(base, int(tok.text))
        return base

    def _base(self) -> Node:
        tok = self._advance()
        if tok.kind == "num":
            return RealLit(float(tok.text))
        if tok.kind == "sym" and tok.text == "[":
            return self._interval_literal(tok)
        if tok.kind == "sym" and tok.text == "(":
            node = self._expr()
            self._expect(")")
            return node
        if tok.kind == "ident":
            return self._identifier(tok)
        self._fail(f"expected an operand, got {tok.text or 'end of input'!r}", tok)

    def _interval_literal(self, opening: Token) -> Node:
        lo_tok = self._expect_number()
        self._expect(",")
        hi_tok = self._expect_number()
        self._expect("]")
        lo, hi = float(lo_tok.text), float(hi_tok.text)
        if lo > hi:
            line, column = _line_col(self._text, opening.pos)
            message = f"interval literal [{lo_tok.text},{hi_tok.text}] has lo > hi; normalized (line {line}, column {column})"
            logger.warning(message)
            self.warnings.append(message)
        return IntervalLit(bracket(lo, hi))

    def _identifier(self, tok: Token) -> Node:
        name = tok.text
        if name == "t":
            return Var(1)
        match = _VAR_RE.fullmatch(name)
        if match is not None:
            index = int(match.group(1))
            if index < 1:
                self._fail(f"variable indices start at 1, got {name}", tok)
            if index > self._arity:
                self._fail(f"variable {name} exceeds arity {self._arity}", tok)
            return Var(index)
        if name in FUNCTIONS:
            self._expect("(")
            arg = self._expr()
            self._expect(")")
            return Unary(name, arg)
        if name in BINARY_FUNCTIONS:
            self._expect("(")
            left = self._expr()
            self._expect(",")
            right = self._expr()
            self._expect(")")
            return GhDiff(left, right)
        self._fail(f"unknown identifier {name!r}", tok)

    # ------------------------------------------------------------------
    # Token helpers
    # ------------------------------------------------------------------

    def _peek(self) -> Token:
        return self._tokens[self._index]

    def _advance(self) -> Token:
        tok = self._tokens[self._index]
        if tok.kind != "end":
            self._index += 1
        return tok

    def _expect(self, symbol: str) -> Token:
        tok = self._advance()
        if tok.kind != "sym" or tok.text != symbol:
            self._fail(f"expected {symbol!r}, got {tok.text or 'end of input'!r}", tok)
        return tok

    def _expect_number(self) -> Token:
        tok = self._advance()
        if tok.kind != "num":
            self._fail(f"expected a number, got {tok.text or 'end of input'!r}", tok)
        return tok

    def _fail(self, message: str, tok: Token):
        line, column = _line_col(self._text, tok.pos)
        raise ParseError(message, line, column)


def parse(text: str, arity: int) -> Expr:
    """Parse ``text`` into an :class:`Expr` of the given arity."""
    return Parser(text, arity).parse()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PRECEDENCE = {Add: 1, Sub: 1, Mul: 2, IntPow: 3}


def _prec(node: Node) -> int:
    return _PRECEDENCE.get(type(node), 4)


def _wrap(node: Node, parens: bool) -> str:
    text = to_text(node)
    return f"({text})" if parens else text


def to_text(node: Union[Node, Expr]) -> str:
    """Canonical text; ``parse(to_text(e), e.arity)`` rebuilds the same tree."""
    if isinstance(node, Expr):
        node = node.root
    if isinstance(node, IntervalLit):
        return f"[{node.value.lo!r},{node.value.hi!r}]"
    if isinstance(node, RealLit):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, (Add, Sub)):
        op = " + " if isinstance(node, Add) else " - "
        return _wrap(node.left, _prec(node.left) < 1) + op + _wrap(node.right, _prec(node.right) <= 1)
    if isinstance(node, Mul):
        return _wrap(node.left, _prec(node.left) < 2) + "*" + _wrap(node.right, _prec(node.right) <= 2)
    if isinstance(node, IntPow):
        return f"{_wrap(node.base, _prec(node.base) <= 3)}^{node.k}"
    if isinstance(node, Unary):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, GhDiff):
        return f"ghdiff({to_text(node.left)}, {to_text(node.right)})"
    raise InvalidArgumentError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# Interval evaluation
# ---------------------------------------------------------------------------


def _eval_node(node: Node, coords: tuple[float, ...]) -> Interval:
    if isinstance(node, IntervalLit):
        return node.value
    if isinstance(node, RealLit):
        return degenerate(node.value)
    if isinstance(node, Var):
        return degenerate(coords[node.index - 1])
    if isinstance(node, Add):
        return add(_eval_node(node.left, coords), _eval_node(node.right, coords))
    if isinstance(node, Sub):
        return add(_eval_node(node.left, coords), scalar_mul(-1.0, _eval_node(node.right, coords)))
    if isinstance(node, Mul):
        return mul(_eval_node(node.left, coords), _eval_node(node.right, coords))
    if isinstance(node, IntPow):
        return int_pow(_eval_node(node.base, coords), node.k)
    if isinstance(node, Unary):
        return monotone_unary(node.func, _eval_node(node.arg, coords))
    if isinstance(node, GhDiff):
        return gh_diff(_eval_node(node.left, coords), _eval_node(node.right, coords))
    raise InvalidArgumentError(f"unknown node {node!r}")


def eval_interval(e: Expr, p: PointLike) -> Interval:
    """f̂(p) = [f̲(p), f̄(p)] by interval arithmetic."""
    point = as_point(p, e.arity)
    try:
        return _eval_node(e.root, point.coords)
    except InvalidArgumentError as exc:
        if isinstance(exc, DomainError):
            raise
        # a finite operand can still produce inf/nan on overflow
        raise DomainError(f"evaluation of {e.text} at {point.coords} is not finite: {exc}") from exc


# ---------------------------------------------------------------------------
# Endpoint evaluation
# ---------------------------------------------------------------------------


class _EndpointWalker:
    """Pushes (lower, upper) jets through the tree in preorder."""

    def __init__(self, inputs: Sequence, tie_tol: float) -> None:
        if tie_tol < 0.0:
            raise InvalidArgumentError(f"tie_tol cannot be negative, got {tie_tol}")
        self._inputs = inputs
        self._tie_tol = tie_tol
        self._next_id = 0
        self.ties: list[str] = []
        self.signature: list[tuple[int, int]] = []

    def walk(self, node: Node):
        node_id = self._next_id
        self._next_id += 1

        if isinstance(node, IntervalLit):
            template = self._inputs[0]
            return template.const(node.value.lo), template.const(node.value.hi)
        if isinstance(node, RealLit):
            c = self._inputs[0].const(node.value)
            return c, c
        if isinstance(node, Var):
            x = self._inputs[node.index - 1]
            return x, x
        if isinstance(node, Add):
            a, b = self.walk(node.left), self.walk(node.right)
            return a[0] + b[0], a[1] + b[1]
        if isinstance(node, Sub):
            a, b = self.walk(node.left), self.walk(node.right)
            return a[0] + (-b[1]), a[1] + (-b[0])
        if isinstance(node, Mul):
            a, b = self.walk(node.left), self.walk(node.right)
            label = "scalar_mul" if (_is_real_node(node.left) or _is_real_node(node.right)) else "mul"
            candidates = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
            return (
                self._select(candidates, False, node_id, label),
                self._select(candidates, True, node_id, label),
            )
        if isinstance(node, IntPow):
            return self._int_pow(self.walk(node.base), node.k, node_id)
        if isinstance(node, Unary):
            lo, hi = self.walk(node.arg)
            check_unary_domain(node.func, lo.v)
            method = {"exp": "exp", "ln": "log", "sqrt": "sqrt"}[node.func]
            return getattr(lo, method)(), getattr(hi, method)()
        if isinstance(node, GhDiff):
            a, b = self.walk(node.left), self.walk(node.right)
            candidates = [a[0] - b[0], a[1] - b[1]]
            return (
                self._select(candidates, False, node_id, "ghdiff"),
                self._select(candidates, True, node_id, "ghdiff"),
            )
        raise InvalidArgumentError(f"unknown node {node!r}")

    def _select(self, candidates: list, largest: bool, node_id: int, label: str):
        values = [c.v for c in candidates]
        pick = max if largest else min
        best = pick(range(len(values)), key=values.__getitem__)
        self.signature.append((node_id, best))
        chosen = candidates[best]
        slack = self._tie_tol * (1.0 + abs(chosen.v))
        for j, other in enumerate(candidates):
            if j != best and abs(other.v - chosen.v) <= slack and not other.agrees(chosen):
                self._tie(label, node_id)
                break
        return chosen

    def _int_pow(self, base, k: int, node_id: int):
        lo, hi = base
        if k == 0:
            one = lo.const(1.0)
            return one, one
        p_lo = lo.powi(k)
        if lo is hi or (lo.v == hi.v and lo.agrees(hi)):
            # real base: every case gives [xᵏ, xᵏ]
            return p_lo, p_lo
        p_hi = hi.powi(k)
        if k % 2 == 1:
            return p_lo, p_hi
        zero = lo.const(0.0)
        near_lo = abs(lo.v) <= self._tie_tol
        near_hi = abs(hi.v) <= self._tie_tol
        # a base pinned at zero only swaps lᵏ and hᵏ; switches there belong to the base
        if near_lo != near_hi:
            if near_lo and not p_lo.agrees(zero):
                self._tie("int_pow", node_id)
            if near_hi and not p_hi.agrees(zero):
                self._tie("int_pow", node_id)
        if lo.v >= 0.0:
            self.signature.append((node_id, 0))
            return p_lo, p_hi
        if hi.v <= 0.0:
            self.signature.append((node_id, 1))
            return p_hi, p_lo
        self.signature.append((node_id, 2))
        return zero, self._select([p_lo, p_hi], True, node_id, "int_pow")

    def _tie(self, label: str, node_id: int) -> None:
        location = f"{label}@{node_id}"
        if location not in self.ties:
            self.ties.append(location)


def _require_finite(e: Expr, point: EvalPoint, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise DomainError(f"endpoint derivatives of {e.text} at {point.coords} are not finite")


@dataclass(frozen=True)
class DualEndpoint:
    """Endpoint values and gradients of f̲, f̄ at one point."""

    lo_val: float
    hi_val: float
    lo_grad: tuple[float, ...]
    hi_grad: tuple[float, ...]
    branch_stable: bool
    tie_locations: tuple[str, ...]
    signature: tuple[tuple[int, int], ...] = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "lo_val":        self.lo_val,
            "hi_val":        self.hi_val,
            "lo_grad":       list(self.lo_grad),
            "hi_grad":       list(self.hi_grad),
            "branch_stable": self.branch_stable,
            "tie_locations": list(self.tie_locations),
        }


@dataclass(frozen=True)
class SeriesEndpoint:
    """Taylor coefficients of t ↦ f̲(a+tv) and t ↦ f̄(a+tv) at t = 0."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    branch_stable: bool
    tie_locations: tuple[str, ...]
    signature: tuple[tuple[int, int], ...] = field(default=(), compare=False, repr=False)

    @property
    def order(self) -> int:
        return len(self.lo) - 1

    def derivative(self, k: int) -> Interval:
        """ĝ⁽ᵏ⁾(0) = [k!·c̲ₖ ∨ k!·c̄ₖ]."""
        scale = float(math.factorial(k))
        return bracket(scale * self.lo[k], scale * self.hi[k])


def eval_dual(e: Expr, p: PointLike, tie_tol: float = TIE_TOL) -> DualEndpoint:
    """Dual-endpoint forward AD at ``p``."""
    point = as_point(p, e.arity)
    n = e.arity
    walker = _EndpointWalker([GradJet.variable(x, i, n) for i, x in enumerate(point.coords)], tie_tol)
    lo, hi = walker.walk(e.root)
    _require_finite(e, point, np.concatenate(([lo.v, hi.v], lo.d, hi.d)))
    return DualEndpoint(
        lo_val=lo.v,
        hi_val=hi.v,
        lo_grad=tuple(float(g) for g in lo.d),
        hi_grad=tuple(float(g) for g in hi.d),
        branch_stable=not walker.ties,
        tie_locations=tuple(walker.ties),
        signature=tuple(walker.signature),
    )


def eval_series(
    e: Expr,
    a: PointLike,
    v: Sequence[float],
    order: int,
    tie_tol: float = TIE_TOL,
) -> SeriesEndpoint:
    """Taylor-mode propagation of both endpoints along x(t) = a + t·v."""
    point = as_point(a, e.arity)
    direction = np.atleast_1d(np.asarray(v, dtype=float))
    if direction.shape != (e.arity,):
        raise InvalidArgumentError(f"direction has {direction.size} entries, expression arity is {e.arity}")
    walker = _EndpointWalker(
        [Series.variable(x, float(d), order) for x, d in zip(point.coords, direction)],
        tie_tol,
    )
    lo, hi = walker.walk(e.root)
    _require_finite(e, point, np.concatenate((lo.c, hi.c)))
    return SeriesEndpoint(
        lo=tuple(float(c) for c in lo.c),
        hi=tuple(float(c) for c in hi.c),
        branch_stable=not walker.ties,
        tie_locations=tuple(walker.ties),
        signature=tuple(walker.signature),
    )


def branch_signature(e: Expr, p: PointLike, tie_tol: float = TIE_TOL) -> tuple[tuple[int, int], ...]:
    """Which candidate won at every selection node; equal signatures ⇒ same smooth branch."""
    return eval_dual(e, p, tie_tol).signature


# ---------------------------------------------------------------------------
# Branch stability scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of a grid scan for endpoint branch switches."""

    stable: bool
    samples: int
    unstable_points: tuple[tuple[float, ...], ...]
    domain_errors: tuple[tuple[tuple[float, ...], str], ...]
    signatures: int            # distinct branch signatures seen on the grid
    order_flips: tuple[tuple[float, ...], ...] = ()

    def __bool__(self) -> bool:
        return self.stable

    def to_dict(self) -> dict:
        return {
            "stable":          self.stable,
            "samples":         self.samples,
            "unstable_points": [list(p) for p in self.unstable_points],
            "domain_errors":   [[list(p), msg] for p, msg in self.domain_errors],
            "signatures":      self.signatures,
            "order_flips":     [list(p) for p in self.order_flips],
        }


def grid_points(box: Sequence[Interval], samples: int) -> list[tuple[float, ...]]:
    axes = [np.linspace(b.lo, b.hi, samples).tolist() for b in box]
    return [tuple(p) for p in itertools.product(*axes)]


def point_is_stable(e: Expr, p: PointLike, order: int = DEFAULT_STABILITY_ORDER, tie_tol: float = TIE_TOL) -> bool:
    """No disagreeing ties at ``p`` up to ``order`` (first order via eval_dual, higher along each axis)."""
    if not eval_dual(e, p, tie_tol).branch_stable:
        return False
    if order >= 2:
        for axis in range(e.arity):
            direction = np.zeros(e.arity)
            direction[axis] = 1.0
            if not eval_series(e, p, direction, order, tie_tol).branch_stable:
                return False
    return True


def _slope_order(dual: DualEndpoint, tie_tol: float) -> np.ndarray:
    """Per axis: +1 where the upper endpoint rises faster, −1 where the lower does, 0 on a tie."""
    lo, hi = np.asarray(dual.lo_grad), np.asarray(dual.hi_grad)
    gap = hi - lo
    slack = tie_tol * (1.0 + np.abs(lo) + np.abs(hi))
    return np.where(np.abs(gap) <= slack, 0, np.sign(gap)).astype(int)


def _order_flips(points: list[tuple[float, ...]], orders: np.ndarray, samples: int) -> list[tuple[float, ...]]:
    """Midpoints between grid neighbours whose slope ordering has opposite signs (zeros are skipped)."""
    arity = len(points[0])
    shape = (samples,) * arity + (arity,)
    grid = np.asarray(points, dtype=float).reshape(shape)
    signs = orders.reshape(shape)
    flips: set[tuple[float, ...]] = set()
    for axis in range(arity):
        lines = zip(
            np.moveaxis(grid, axis, -2).reshape(-1, samples, arity),
            np.moveaxis(signs, axis, -2).reshape(-1, samples, arity),
        )
        for line_points, line_signs in lines:
            last: dict[int, int] = {}
            for j in range(samples):
                for c in np.flatnonzero(line_signs[j]).tolist():
                    k = last.get(c)
                    if k is not None and line_signs[k, c] != line_signs[j, c]:
                        flips.add(tuple(float(v) for v in 0.5 * (line_points[k] + line_points[j])))
                    last[c] = j
    return sorted(flips)


def branch_stability(
    e: Expr,
    box: Sequence[Interval],
    samples: int = DEFAULT_STABILITY_SAMPLES,
    order: int = DEFAULT_STABILITY_ORDER,
    tie_tol: float = TIE_TOL,
) -> StabilityReport:
    """
    Scan a regular grid of ``samples`` points per axis.

    A box is stable when no sample has a branch tie, every sample evaluates,
    all samples share a single branch signature and the ordering of the
    endpoint partials (∂f̄/∂xᵢ against ∂f̲/∂xᵢ) keeps its sign between grid
    neighbours. A sign change is reported at the midpoint of the two
    neighbours, whether or not a sample lands on the crossing. Domain errors
    are reported per point.
    """
    if len(box) != e.arity:
        raise InvalidArgumentError(f"box has {len(box)} axes, expression arity is {e.arity}")
    if samples < 2:
        raise InvalidArgumentError(f"need at least 2 samples per axis, got {samples}")

    unstable: list[tuple[float, ...]] = []
    failures: list[tuple[tuple[float, ...], str]] = []
    signatures: set = set()
    points = grid_points(box, samples)
    orders = np.zeros((len(points), e.arity), dtype=int)
    for k, point in enumerate(points):
        try:
            dual = eval_dual(e, point, tie_tol)
            signatures.add(dual.signature)
            orders[k] = _slope_order(dual, tie_tol)
            if not point_is_stable(e, point, order, tie_tol):
                unstable.append(point)
        except DomainError as exc:
            failures.append((point, str(exc)))

    flips = _order_flips(points, orders, samples)
    stable = not unstable and not failures and not flips and len(signatures) <= 1
    if not stable:
        logger.debug(
            "Branch scan | {} | {} unstable | {} order flips | {} domain errors | {} signatures",
            e.text, len(unstable), len(flips), len(failures), len(signatures),
        )
    return StabilityReport(stable, len(points), tuple(unstable), tuple(failures), len(signatures), tuple(flips))


# ---------------------------------------------------------------------------
# Smoke test
# ---------------------------------------------------------------------------

if __name__ == "__main__":
    import sys

    logger.remove()
    logger.add(sys.stderr, level="INFO")

    ee = parse("exp([-1,2]*t)", 1)
    dual = eval_dual(ee, [1.0])
    logger.info("EE at 1: value [{:.6g}, {:.6g}] | grads {} {}", dual.lo_val, dual.hi_val, dual.lo_grad, dual.hi_grad)

    note = parse("[1,2]*x1 + [0,1]*x2^2", 2)
    dual = eval_dual(note, [0.0, 0.0])
    if dual.branch_stable:
        logger.error("Note case FAILED — expected a branch tie at (0, 0)")
    else:
        logger.success("Note case PASSED — ties at {}", dual.tie_locations)
