"""
ivexpand — Independent oracles and property checks

Every check returns a :class:`Report`:

  check_id    stable identifier, the sort key of a suite run
  passed      measured ≤ tolerance (always True for skipped checks)
  measured    worst relative defect seen
  tolerance   threshold the defect is compared against
  samples     number of comparisons that contributed
  witnesses   worst offending comparisons (always present on failure)

Defects are relative: an absolute Hausdorff distance or inclusion excess is
divided by 1 + magnitude of the reference interval.

Oracles never reuse the code path under test: endpoint slopes come from
central differences of ``eval_interval``, the left-hand sides of the rule
identities from the numeric gH quotient of the combined expression.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ivexpand.calculus import (
    MU_DECREASING,
    MU_INCREASING,
    chain_gradient,
    directional_derivs,
    hessian,
    inner_jacobian,
    mixed_contributions,
    mu_classify,
    partial_gh,
    partial_numeric,
    real_product_derivative,
)
from ivexpand.corpus import (
    DEFAULT_SEED,
    EE,
    EF,
    HESSIAN,
    NOTE,
    SQUARE,
    ChainCase,
    MvtCase,
    ProductCase,
    generate_bracket_cases,
    generate_chain_cases,
    generate_mvt_cases,
    generate_product_cases,
    reference_corpus,
)
from ivexpand.errors import (
    DomainError,
    InvalidArgumentError,
    MathematicalError,
    PreconditionViolatedError,
)
from ivexpand.expansion import (
    enclosure_1d,
    enclosure_nd,
    remainder_decay,
    taylor_nd,
    term_groups,
)
from ivexpand.funcexpr import (
    TIE_TOL,
    EvalPoint,
    Expr,
    PointLike,
    as_point,
    branch_signature,
    combine,
    eval_dual,
    eval_interval,
    parse,
    perturb,
    substitute,
)
from ivexpand.interval import (
    Interval,
    IntervalVector,
    add,
    bracket,
    gh_diff,
    hausdorff,
    hull,
    magnitude,
    neg,
    scalar_mul,
)

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

ORACLE_STEP: float     = 1e-5    # central-difference step of the endpoint oracle
BRACKET_TOL: float     = 1e-6    # relative Hausdorff defect
NUMERIC_TOL: float     = 1e-6
RULE_TOL: float        = 1e-6
INCLUSION_PAD: float   = 1e-9    # relative padding of the right-hand side
FORMS_TOL: float       = 1e-9
SYMMETRY_TOL: float    = 1e-12
DECAY_RATIO_TOL: float = 1e-3    # ‖R_last‖ / ‖R_1‖
DECAY_TAIL_TOL: float  = 1.0 - 1e-12   # max ‖Rₙ₊₁‖/‖Rₙ‖ over the tail
DECAY_TAIL_FROM: int   = 8
DECAY_N_MAX: int       = 15

MVT_GRID: int          = 257
RULE_BOX_RADIUS: float = 1e-3    # μ-classification box, scaled by 1+|pᵢ|
RULE_BOX_GRID: int     = 5
MAX_WITNESSES: int     = 5

SUM_EQUAL: str     = "sum-equal"
SUM_DIFFERENT: str = "sum-different"
GH_EQUAL: str      = "gh-equal"
GH_DIFFERENT: str  = "gh-different"
PRODUCT: str       = "product"
CHAIN: str         = "chain"
RULE_MODES: tuple[str, ...] = (SUM_EQUAL, SUM_DIFFERENT, GH_EQUAL, GH_DIFFERENT, PRODUCT, CHAIN)

EE_TARGETS: tuple[float, ...] = (1.1, 1.25, 1.5)
EF_TARGETS: tuple[tuple[float, float], ...] = ((2.1, 2.1), (2.5, 2.0), (2.0, 2.4))


# ---------------------------------------------------------------------------
# Report models
# ---------------------------------------------------------------------------


class Witness(BaseModel):
    """One comparison: reference interval, computed interval and their defect."""

    model_config = ConfigDict(frozen=True)

    point:    list[float]
    expected: list[float]    # [lo, hi]
    actual:   list[float]    # [lo, hi]
    defect:   float


class Report(BaseModel):
    """Outcome of one verification check."""

    model_config = ConfigDict(frozen=True)

    check_id:  str
    passed:    bool
    measured:  float
    tolerance: float
    samples:   int = 0
    witnesses: list[Witness] = Field(default_factory=list)
    skipped:   bool = False
    reason:    Optional[str] = None
    details:   dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _consistent(self) -> "Report":
        if self.skipped:
            if not self.passed:
                raise ValueError("a skipped report cannot be failed")
            if not self.reason:
                raise ValueError("a skipped report needs a reason")
            return self
        if self.passed != (self.measured <= self.tolerance):
            raise ValueError(
                f"passed={self.passed} contradicts measured={self.measured} vs tolerance={self.tolerance}"
            )
        if not self.passed and not self.witnesses:
            raise ValueError("a failed report must carry at least one witness")
        return self

    @classmethod
    def skip(cls, check_id: str, tolerance: float, reason: str, details: Optional[dict] = None) -> "Report":
        return cls(
            check_id=check_id,
            passed=True,
            measured=0.0,
            tolerance=tolerance,
            skipped=True,
            reason=reason,
            details=details or {},
        )

    @property
    def status(self) -> str:
        if self.skipped:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return self.model_dump()


def _witness(point: Sequence[float], expected: Interval, actual: Interval, defect: float) -> Witness:
    return Witness(point=[float(x) for x in point], expected=expected.to_list(), actual=actual.to_list(), defect=defect)


def _relative(expected: Interval, actual: Interval) -> float:
    return hausdorff(expected, actual) / (1.0 + magnitude(expected))


def _excess(lhs: Interval, rhs: Interval) -> float:
    """How far lhs sticks out of rhs, relative to rhs."""
    return max(0.0, rhs.lo - lhs.lo, lhs.hi - rhs.hi) / (1.0 + magnitude(rhs))


def _build_report(
    check_id: str,
    tolerance: float,
    rows: Sequence[Witness],
    details: Optional[dict] = None,
) -> Report:
    measured = max((w.defect for w in rows), default=0.0)
    passed = measured <= tolerance
    ranked = sorted(rows, key=lambda w: -w.defect)
    if passed:
        witnesses = ranked[:1]
    else:
        witnesses = [w for w in ranked if w.defect > tolerance][:MAX_WITNESSES]
    return Report(
        check_id=check_id,
        passed=passed,
        measured=measured,
        tolerance=tolerance,
        samples=len(rows),
        witnesses=witnesses,
        details=details or {},
    )


def merge_reports(check_id: str, reports: Sequence[Report], tolerance: float) -> Report:
    """One report over several same-tolerance reports; skipped ones are listed, not counted."""
    ran = [r for r in reports if not r.skipped]
    skipped = [{"check_id": r.check_id, "reason": r.reason} for r in reports if r.skipped]
    if reports and not ran:
        return Report.skip(check_id, tolerance, "every case was skipped", {"skipped": skipped})
    measured = max((r.measured for r in ran), default=0.0)
    passed = measured <= tolerance
    witnesses = [w for r in sorted(ran, key=lambda r: -r.measured) if r.measured > tolerance for w in r.witnesses]
    if passed:
        witnesses = [w for r in sorted(ran, key=lambda r: -r.measured)[:1] for w in r.witnesses[:1]]
    return Report(
        check_id=check_id,
        passed=passed,
        measured=measured,
        tolerance=tolerance,
        samples=sum(r.samples for r in ran),
        witnesses=witnesses[:MAX_WITNESSES],
        details={"cases": len(reports), "skipped": skipped},
    )


# ---------------------------------------------------------------------------
# Bracket theorem
# ---------------------------------------------------------------------------


def oracle_endpoint_fd(e: Expr, i: int, p: PointLike, h: float = ORACLE_STEP) -> tuple[float, float]:
    """Central-difference slopes of the lo and hi components of ``eval_interval``."""
    if not h > 0.0:
        raise InvalidArgumentError(f"oracle step h must be positive, got {h}")
    point = as_point(p, e.arity)
    plus = eval_interval(e, perturb(point, i, h))
    minus = eval_interval(e, perturb(point, i, -h))
    return (plus.lo - minus.lo) / (2.0 * h), (plus.hi - minus.hi) / (2.0 * h)


def _bracket_precondition(e: Expr, point: EvalPoint, i: int, h: float) -> Optional[str]:
    try:
        dual = eval_dual(e, point)
        if not dual.branch_stable:
            return f"endpoint partials do not exist: branch tie at {', '.join(dual.tie_locations)}"
        for step in (-h, h):
            if branch_signature(e, perturb(point, i, step)) != dual.signature:
                return f"endpoint branch switches within ±{h:g} along x{i}"
    except DomainError as exc:
        return str(exc)
    return None


def check_bracket_theorem(
    corpus: Sequence[tuple[Expr, PointLike]],
    tolerance: float = BRACKET_TOL,
    h: float = ORACLE_STEP,
    check_id: str = "bracket",
) -> Report:
    """``partial_gh`` against the bracket of oracle endpoint slopes, every axis of every case."""
    rows: list[Witness] = []
    skipped: list[dict] = []
    for e, p in corpus:
        point = as_point(p, e.arity)
        for i in range(1, e.arity + 1):
            reason = _bracket_precondition(e, point, i, h)
            if reason is not None:
                skipped.append({"expr": e.text, "point": list(point.coords), "axis": i, "reason": reason})
                continue
            expected = bracket(*oracle_endpoint_fd(e, i, point, h))
            actual = partial_gh(e, i, point).value
            rows.append(_witness(point.coords, expected, actual, _relative(expected, actual)))

    if skipped:
        logger.info("{} | {} comparisons skipped by the branch-stability filter", check_id, len(skipped))
    if skipped and not rows:
        return Report.skip(check_id, tolerance, skipped[0]["reason"], {"skipped": skipped})
    return _build_report(check_id, tolerance, rows, {"skipped": skipped})


def check_numeric_partial(
    e: Expr,
    i: int,
    p: PointLike,
    expected: Interval,
    tolerance: float = NUMERIC_TOL,
    check_id: str = "numeric",
) -> Report:
    """Numeric gH quotient against a known value (used where endpoint partials do not exist)."""
    point = as_point(p, e.arity)
    try:
        result = partial_numeric(e, i, point)
    except MathematicalError as exc:
        return Report.skip(check_id, tolerance, str(exc))
    defect = hausdorff(expected, result.value)
    details = {"branch_stable": eval_dual(e, point).branch_stable, "method": result.method}
    return _build_report(check_id, tolerance, [_witness(point.coords, expected, result.value, defect)], details)


# ---------------------------------------------------------------------------
# Mean value inclusion
# ---------------------------------------------------------------------------


def check_mvt(
    e: Expr,
    alpha: float,
    beta: float,
    grid: int = MVT_GRID,
    pad: float = INCLUSION_PAD,
    check_id: str = "mvt",
) -> Report:
    """f̂(β) ⊖gH f̂(α) ⊆ (β−α) ⊙ hull{f̂′(c) : c on a grid over [α, β]}."""
    if e.arity != 1:
        raise InvalidArgumentError(f"check_mvt needs a single-variable expression, got arity {e.arity}")
    if alpha > beta:
        raise InvalidArgumentError(f"need alpha <= beta, got [{alpha}, {beta}]")
    if grid < 2:
        raise InvalidArgumentError(f"grid must have at least 2 points, got {grid}")

    lhs = gh_diff(eval_interval(e, [beta]), eval_interval(e, [alpha]))
    try:
        derivs = [partial_gh(e, 1, [c]).value for c in np.linspace(alpha, beta, grid).tolist()]
    except (MathematicalError, DomainError) as exc:
        return Report.skip(check_id, pad, f"derivative not available on [{alpha}, {beta}]: {exc}")
    rhs = scalar_mul(beta - alpha, hull(derivs))
    defect = _excess(lhs, rhs)
    return _build_report(
        check_id,
        pad,
        [_witness((alpha, beta), rhs, lhs, defect)],
        {"lhs": lhs.to_list(), "rhs": rhs.to_list(), "grid": grid},
    )


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------


def check_expansion_inclusion(
    e: Expr,
    a: PointLike,
    x: PointLike,
    n: int,
    pad: float = INCLUSION_PAD,
    check_id: str = "expansion",
) -> Report:
    """Expansion defect f̂(x) ⊖gH partial sum against the sampled remainder hull."""
    a_pt = as_point(a, e.arity)
    x_pt = as_point(x, e.arity)
    try:
        if e.arity == 1:
            enclosure = enclosure_1d(e, a_pt[0], x_pt[0], n)
        else:
            enclosure = enclosure_nd(e, a_pt, x_pt, n)
    except (MathematicalError, DomainError) as exc:
        return Report.skip(check_id, pad, str(exc))
    defect = _excess(enclosure.lhs, enclosure.rhs)
    return _build_report(
        check_id,
        pad,
        [_witness(x_pt.coords, enclosure.rhs, enclosure.lhs, defect)],
        {"lhs": enclosure.lhs.to_list(), "rhs": enclosure.rhs.to_list(), "margin": enclosure.margin},
    )


def check_expansion_forms(
    e: Expr,
    a: PointLike,
    x: PointLike,
    s: int = 3,
    tolerance: float = FORMS_TOL,
    check_id: str = "forms",
) -> Report:
    """Tensor-form groups of order k against (1/k!) ĝ⁽ᵏ⁾(0) along v = x − a."""
    a_pt = as_point(a, e.arity)
    x_pt = as_point(x, e.arity)
    v = np.asarray(x_pt.coords) - np.asarray(a_pt.coords)
    try:
        groups = term_groups(taylor_nd(e, a_pt, s=s), x_pt)
        ladder = directional_derivs(e, a_pt, v, s - 1)
    except (MathematicalError, DomainError) as exc:
        return Report.skip(check_id, tolerance, str(exc))
    rows = []
    for k in range(s):
        expected = scalar_mul(1.0 / math.factorial(k), ladder[k])
        rows.append(_witness(x_pt.coords, expected, groups[k], _relative(expected, groups[k])))
    return _build_report(check_id, tolerance, rows)


def check_hessian_symmetry(
    corpus: Sequence[tuple[Expr, PointLike]],
    tolerance: float = SYMMETRY_TOL,
    check_id: str = "hessian.symmetry",
) -> Report:
    rows = []
    for e, p in corpus:
        if e.arity < 2:
            continue
        point = as_point(p, e.arity)
        try:
            h = hessian(e, point)
        except (MathematicalError, DomainError) as exc:
            logger.info("{} | {} skipped: {}", check_id, e.text, exc)
            continue
        for i in range(e.arity):
            for j in range(i + 1, e.arity):
                rows.append(_witness(point.coords, h[i, j], h[j, i], _relative(h[i, j], h[j, i])))
    return _build_report(check_id, tolerance, rows)


def check_remainder_decay(
    e: Expr,
    a: float,
    x: float,
    n_max: int = DECAY_N_MAX,
    tail_from: int = DECAY_TAIL_FROM,
    check_id: str = "decay",
) -> list[Report]:
    """Two reports: overall ratio ‖R_last‖/‖R₁‖ and the largest tail step ratio."""
    try:
        sequence = remainder_decay(e, a, x, n_max)
    except (MathematicalError, DomainError) as exc:
        return [
            Report.skip(f"{check_id}.ratio", DECAY_RATIO_TOL, str(exc)),
            Report.skip(f"{check_id}.tail", DECAY_TAIL_TOL, str(exc)),
        ]
    mags = [m for _, m in sequence]
    details = {"magnitudes": mags}
    first = mags[0]
    if first == 0.0:
        return [
            Report.skip(f"{check_id}.ratio", DECAY_RATIO_TOL, "first remainder is zero", details),
            Report.skip(f"{check_id}.tail", DECAY_TAIL_TOL, "first remainder is zero", details),
        ]

    ratio = mags[-1] / first
    ratio_report = Report(
        check_id=f"{check_id}.ratio",
        passed=ratio <= DECAY_RATIO_TOL,
        measured=ratio,
        tolerance=DECAY_RATIO_TOL,
        samples=len(mags),
        witnesses=[Witness(point=[a, x], expected=[0.0, DECAY_RATIO_TOL], actual=[ratio, ratio], defect=ratio)],
        details=details,
    )

    steps = [
        (mags[k + 1] / mags[k] if mags[k] > 0.0 else (0.0 if mags[k + 1] == 0.0 else math.inf))
        for k in range(tail_from - 1, len(mags) - 1)
    ]
    worst = max(steps, default=0.0)
    tail_report = Report(
        check_id=f"{check_id}.tail",
        passed=worst <= DECAY_TAIL_TOL,
        measured=worst,
        tolerance=DECAY_TAIL_TOL,
        samples=len(steps),
        witnesses=[Witness(point=[a, x], expected=[0.0, 1.0], actual=[worst, worst], defect=worst)],
        details=details,
    )
    return [ratio_report, tail_report]


# ---------------------------------------------------------------------------
# Rule identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleCase:
    """
    Inputs of one rule identity.

    sum / gh modes use ``f`` and ``g``; product uses the real multiplier
    ``g`` and ``f``; chain uses the outer ``f`` and the real ``inner``
    functions.
    """

    f: Expr
    points: tuple[tuple[float, ...], ...]
    g: Optional[Expr] = None
    inner: tuple[Expr, ...] = ()
    axis: int = 1


def _directions(e: Expr, axis: int, point: EvalPoint) -> set[str]:
    box = [Interval(c - RULE_BOX_RADIUS * (1.0 + abs(c)), c + RULE_BOX_RADIUS * (1.0 + abs(c))) for c in point.coords]
    report = mu_classify(e, axis, box, grid=RULE_BOX_GRID)
    if report.is_constant_spread:
        return {MU_INCREASING, MU_DECREASING}
    return {report.verdict} if report.is_monotone else set()


def _sum_like(mode: str, case: RuleCase, point: EvalPoint) -> tuple[Interval, Interval]:
    f, g, i = case.f, case.g, case.axis
    df, dg = _directions(f, i, point), _directions(g, i, point)
    if mode in (SUM_EQUAL, GH_EQUAL):
        if not df & dg:
            raise PreconditionViolatedError(f"{f.text} and {g.text} are not equally μ-monotone near {point.coords}")
    elif not ((MU_INCREASING in df and MU_DECREASING in dg) or (MU_DECREASING in df and MU_INCREASING in dg)):
        raise PreconditionViolatedError(f"{f.text} and {g.text} are not differently μ-monotone near {point.coords}")

    kind = "add" if mode in (SUM_EQUAL, SUM_DIFFERENT) else "ghdiff"
    lhs = partial_numeric(combine(kind, f, g), i, point).value
    fp = partial_gh(f, i, point).value
    gp = partial_gh(g, i, point).value
    if mode == SUM_EQUAL:
        rhs = add(fp, gp)
    elif mode == SUM_DIFFERENT:
        rhs = gh_diff(fp, neg(gp))
    elif mode == GH_EQUAL:
        rhs = gh_diff(fp, gp)
    else:
        rhs = add(fp, neg(gp))
    return lhs, rhs


def _product(case: RuleCase, point: EvalPoint) -> tuple[Interval, Interval]:
    rhs = real_product_derivative(case.g, case.f, point)
    lhs = partial_numeric(combine("mul", case.g, case.f), 1, point).value
    return lhs, rhs


def _chain(case: RuleCase, point: EvalPoint) -> list[tuple[Interval, Interval]]:
    f, inner = case.f, case.inner
    _, x0, du = inner_jacobian(f, inner, point, TIE_TOL)
    mixed = mixed_contributions(f, x0, du, TIE_TOL)
    if mixed:
        raise PreconditionViolatedError(f"contributions to coordinates {mixed} are differently μ-monotone")
    composite = substitute(f, inner)
    rhs: IntervalVector = chain_gradient(f, inner, point)
    return [(partial_numeric(composite, j, point).value, rhs[j - 1]) for j in range(1, composite.arity + 1)]


def check_algebra_rules(
    mode: str,
    cases: Sequence[RuleCase],
    tolerance: float = RULE_TOL,
    check_id: Optional[str] = None,
) -> Report:
    """
    Both sides of a derivative rule, the left side from the numeric quotient
    of the combined expression. Cases failing the μ-monotonicity
    precondition are skipped with a reason.
    """
    if mode not in RULE_MODES:
        raise InvalidArgumentError(f"unknown rule mode {mode!r}; expected one of {list(RULE_MODES)}")
    check_id = check_id or f"rules.{mode}"
    rows: list[Witness] = []
    skipped: list[dict] = []
    for case in cases:
        if mode in (SUM_EQUAL, SUM_DIFFERENT, GH_EQUAL, GH_DIFFERENT, PRODUCT) and case.g is None:
            raise InvalidArgumentError(f"mode {mode} needs a second expression g")
        if mode == CHAIN and not case.inner:
            raise InvalidArgumentError("mode chain needs inner expressions")
        for p in case.points:
            arity = case.inner[0].arity if mode == CHAIN else case.f.arity
            point = as_point(p, arity)
            try:
                if mode == CHAIN:
                    pairs = _chain(case, point)
                elif mode == PRODUCT:
                    pairs = [_product(case, point)]
                else:
                    pairs = [_sum_like(mode, case, point)]
            except (MathematicalError, DomainError) as exc:
                skipped.append({"expr": case.f.text, "point": list(point.coords), "reason": str(exc)})
                continue
            for lhs, rhs in pairs:
                rows.append(_witness(point.coords, lhs, rhs, _relative(lhs, rhs)))

    if skipped and not rows:
        return Report.skip(check_id, tolerance, skipped[0]["reason"], {"skipped": skipped})
    return _build_report(check_id, tolerance, rows, {"skipped": skipped})


def reference_rule_cases() -> dict[str, list[RuleCase]]:
    """Closed-form cases of every rule mode."""
    def t(text: str) -> Expr:
        return parse(text, 1)

    quarter = ((0.25,), (0.5,), (0.75,))
    return {
        SUM_EQUAL:     [RuleCase(t("[0,1]*t"), quarter, g=t("[1,2]*t"))],
        SUM_DIFFERENT: [RuleCase(t("[0,1]*t"), quarter, g=t("[0,1]*(1-t)"))],
        GH_EQUAL:      [RuleCase(t("[0,2]*t"), quarter, g=t("[0,1]*t"))],
        GH_DIFFERENT:  [RuleCase(t("[0,1]*t"), ((0.25,), (0.75,)), g=t("[0,1]*(1-t)"))],
        PRODUCT: [
            RuleCase(EE.expr(), (EE.point,), g=t("1")),
            RuleCase(EE.expr(), (EE.point,), g=t("2 - t")),
        ],
        CHAIN: [
            RuleCase(parse("[1,2]*x1 + [0,1]*x2", 2), ((1.0,),), inner=(t("t^2"), t("t^3"))),
        ],
    }


def chain_rule_cases(cases: Sequence[ChainCase]) -> list[RuleCase]:
    return [RuleCase(c.outer, (c.point,), inner=c.inner) for c in cases]


def product_rule_cases(cases: Sequence[ProductCase]) -> list[RuleCase]:
    return [RuleCase(c.expr, (c.point,), g=c.multiplier) for c in cases]


def check_mvt_cases(cases: Sequence[MvtCase], check_id: str = "mvt.generated") -> Report:
    reports = [check_mvt(c.expr, c.alpha, c.beta, check_id=f"{check_id}[{k}]") for k, c in enumerate(cases)]
    return merge_reports(check_id, reports, INCLUSION_PAD)


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit value, else IVEXPAND_THREADS, 0 meaning one per CPU."""
    if threads is None:
        raw = os.getenv("IVEXPAND_THREADS", "0")
        try:
            threads = int(raw)
        except ValueError as exc:
            raise InvalidArgumentError(f"IVEXPAND_THREADS must be an integer, got {raw!r}") from exc
    if threads < 0:
        raise InvalidArgumentError(f"thread count cannot be negative, got {threads}")
    return threads or (os.cpu_count() or 1)


def _suite_tasks(seed: int, corpus: Optional[Sequence[tuple[Expr, PointLike]]]) -> list[Callable[[], list[Report]]]:
    ee, ef = EE.expr(), EF.expr()
    note = NOTE.expr()
    rule_cases = reference_rule_cases()

    tasks: list[Callable[[], list[Report]]] = [
        lambda: [check_bracket_theorem(reference_corpus(), check_id="bracket.reference")],
        lambda: [check_bracket_theorem([NOTE.case()], check_id="bracket.note")],
        lambda: [check_bracket_theorem(generate_bracket_cases(seed=seed), check_id="bracket.generated")],
        lambda: [check_numeric_partial(note, 1, NOTE.point, Interval(1.0, 2.0), check_id="numeric.note")],
        lambda: [check_mvt(ee, 0.0, 1.0, check_id="mvt.ee")],
        lambda: [check_mvt(SQUARE.expr(), -1.0, 1.0, check_id="mvt.square")],
        lambda: [check_mvt_cases(generate_mvt_cases(seed=seed))],
        lambda: [check_hessian_symmetry([HESSIAN.case(), EF.case()])],
        lambda: [check_expansion_forms(ef, EF.point, EF_TARGETS[0], check_id="forms.ef")],
        lambda: check_remainder_decay(ee, 1.0, 1.5, check_id="decay.ee"),
        lambda: [
            check_algebra_rules(CHAIN, chain_rule_cases(generate_chain_cases(seed=seed)), check_id="rules.chain.generated")
        ],
        lambda: [
            check_algebra_rules(PRODUCT, product_rule_cases(generate_product_cases(seed=seed)), check_id="rules.product.generated")
        ],
    ]
    for mode, cases in rule_cases.items():
        tasks.append(lambda mode=mode, cases=cases: [check_algebra_rules(mode, cases)])
    for x in EE_TARGETS:
        for n in (1, 2, 3):
            tasks.append(lambda x=x, n=n: [check_expansion_inclusion(ee, 1.0, x, n, check_id=f"expansion.ee.x={x:g}.n={n}")])
    for x in EF_TARGETS:
        for s in (1, 2, 3):
            label = ",".join(f"{c:g}" for c in x)
            tasks.append(
                lambda x=x, s=s, label=label: [
                    check_expansion_inclusion(ef, EF.point, x, s, check_id=f"expansion.ef.x=({label}).s={s}")
                ]
            )
    if corpus is not None:
        tasks.append(lambda: [check_bracket_theorem(corpus, check_id="bracket.corpus")])
    return tasks


def run_suite(
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
    corpus: Optional[Sequence[tuple[Expr, PointLike]]] = None,
) -> list[Report]:
    """
    Every check over the worked examples and the seeded corpora, plus the
    bracket check over ``corpus`` when given. Reports come back sorted by
    ``check_id``.
    """
    tasks = _suite_tasks(seed, corpus)
    workers = resolve_threads(threads)
    logger.info("Verify suite | {} tasks | {} threads | seed={:#x}", len(tasks), workers, seed)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        batches = list(pool.map(lambda task: task(), tasks))
    reports = sorted((r for batch in batches for r in batch), key=lambda r: r.check_id)
    failed = [r.check_id for r in reports if not r.passed]
    if failed:
        logger.warning("Verify suite | {} failed: {}", len(failed), ", ".join(failed))
    return reports


def reports_frame(reports: Sequence[Report]) -> pd.DataFrame:
    """Convenience wrapper: one row per report."""
    return pd.DataFrame(
        [
            {
                "check_id":  r.check_id,
                "status":    r.status,
                "measured":  r.measured,
                "tolerance": r.tolerance,
                "samples":   r.samples,
                "reason":    r.reason,
            }
            for r in reports
        ],
        columns=["check_id", "status", "measured", "tolerance", "samples", "reason"],
    )


# ---------------------------------------------------------------------------
# Smoke test
# ---------------------------------------------------------------------------

if __name__ == "__main__":
    import sys

    logger.remove()
    logger.add(sys.stderr, level="INFO")

    frame = reports_frame(run_suite())
    print(frame.to_string(index=False))
    if (frame["status"] == "FAIL").any():
        logger.error("Verify suite FAILED")
    else:
        logger.success("Verify suite passed ({} checks)", len(frame))
