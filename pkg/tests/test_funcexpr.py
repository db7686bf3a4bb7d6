"""Expression parsing, interval evaluation and dual-endpoint evaluation."""

import math

import pytest

from ivexpand.corpus import DEFAULT_SEED, ExpressionGenerator, generate_bracket_cases
from ivexpand.errors import DomainError, InvalidArgumentError, ParseError
from ivexpand.funcexpr import (
    Add,
    EvalPoint,
    GhDiff,
    IntervalLit,
    IntPow,
    Mul,
    RealLit,
    Sub,
    Unary,
    Var,
    as_point,
    branch_signature,
    branch_stability,
    combine,
    eval_dual,
    eval_interval,
    eval_series,
    is_real_valued,
    parse,
    perturb,
    point_is_stable,
    substitute,
    to_text,
    tokenize,
)
from ivexpand.interval import Interval

E = math.e


class TestTokenizer:
    def test_sign_after_operand_is_an_operator(self):
        kinds = [(t.kind, t.text) for t in tokenize("t-1")]
        assert kinds == [("ident", "t"), ("sym", "-"), ("num", "1"), ("end", "")]

    def test_sign_where_operand_expected_is_part_of_number(self):
        kinds = [(t.kind, t.text) for t in tokenize("[-1,2]")]
        assert ("num", "-1") in kinds

    def test_unexpected_character(self):
        with pytest.raises(ParseError) as info:
            tokenize("t + ?")
        assert info.value.line == 1
        assert info.value.column == 5


class TestParser:
    def test_precedence(self):
        e = parse("1 + 2*t^2", 1)
        assert e.root == Add(RealLit(1.0), Mul(RealLit(2.0), IntPow(Var(1), 2)))

    def test_left_associative_subtraction(self):
        e = parse("t - 1 - 2", 1)
        assert e.root == Sub(Sub(Var(1), RealLit(1.0)), RealLit(2.0))

    def test_functions_and_ghdiff(self):
        e = parse("ghdiff(exp(x1), sqrt(x2))", 2)
        assert e.root == GhDiff(Unary("exp", Var(1)), Unary("sqrt", Var(2)))

    def test_interval_literal(self):
        e = parse("[-1, 2.5]*t", 1)
        assert e.root == Mul(IntervalLit(Interval(-1.0, 2.5)), Var(1))

    def test_t_is_first_variable(self):
        assert parse("t", 1).root == parse("x1", 1).root

    def test_reversed_literal_is_normalized_with_warning(self):
        e = parse("[2,1]*t", 1)
        assert len(e.warnings) == 1
        assert "normalized" in e.warnings[0]
        assert eval_interval(e, [1.0]) == Interval(1.0, 2.0)

    @pytest.mark.parametrize(
        "text",
        ["exp(", "t +", "x3", "x0", "foo(t)", "t^-1", "t^1.5", "[1,2", "(t", "t t", "[a,1]"],
    )
    def test_rejects_malformed(self, text):
        with pytest.raises(ParseError):
            parse(text, 2)

    def test_error_reports_position(self):
        with pytest.raises(ParseError) as info:
            parse("t +\n  foo(t)", 1)
        assert info.value.line == 2
        assert info.value.column == 3

    def test_bad_arity(self):
        with pytest.raises(InvalidArgumentError):
            parse("t", 0)

    @pytest.mark.parametrize(
        "text, arity",
        [
            ("exp([-1,2]*t)", 1),
            ("[-2,3]*x1*exp([-1,2]*x2)", 2),
            ("(x1 - x2)*(x1 + 1)^2", 2),
            ("ghdiff(ln(t + 2), [0,1]) - (2 - t)", 1),
        ],
    )
    def test_printer_rebuilds_tree(self, text, arity):
        e = parse(text, arity)
        assert parse(to_text(e), arity) == e


class TestStructure:
    def test_is_real_valued(self):
        assert is_real_valued(parse("2 - t", 1))
        assert is_real_valued(parse("[1,1]*t", 1))
        assert not is_real_valued(parse("exp([-1,2]*t)", 1))

    def test_substitute(self):
        outer = parse("[1,2]*x1 + [0,1]*x2", 2)
        inner = (parse("t^2", 1), parse("t^3", 1))
        composite = substitute(outer, inner)
        assert composite.arity == 1
        assert eval_interval(composite, [2.0]) == Interval(4.0, 16.0)

    def test_substitute_checks_counts(self):
        outer = parse("x1 + x2", 2)
        with pytest.raises(InvalidArgumentError):
            substitute(outer, (parse("t", 1),))
        with pytest.raises(InvalidArgumentError):
            substitute(outer, (parse("t", 1), parse("x1 + x2", 2)))

    def test_combine(self):
        f, g = parse("[0,1]*t", 1), parse("[1,2]*t", 1)
        assert eval_interval(combine("add", f, g), [1.0]) == Interval(1.0, 3.0)
        assert eval_interval(combine("ghdiff", g, f), [1.0]) == Interval(1.0, 1.0)
        with pytest.raises(InvalidArgumentError):
            combine("div", f, g)

    def test_points(self):
        assert as_point([1.0, 2.0], 2) == EvalPoint((1.0, 2.0))
        assert perturb([1.0, 2.0], 2, 0.5) == EvalPoint((1.0, 2.5))
        with pytest.raises(InvalidArgumentError):
            as_point([1.0], 2)
        with pytest.raises(InvalidArgumentError):
            as_point([math.nan], 1)
        with pytest.raises(InvalidArgumentError):
            perturb([1.0], 2, 0.1)


class TestEvalInterval:
    def test_exponential_example(self):
        value = eval_interval(parse("exp([-1,2]*t)", 1), [1.0])
        assert value.lo == pytest.approx(1.0 / E)
        assert value.hi == pytest.approx(E**2)

    def test_two_variable_example(self):
        value = eval_interval(parse("[1,4]*x1^2 + [0,1]*x2", 2), [1.0, 1.0])
        assert value == Interval(1.0, 5.0)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eval_interval(parse("sqrt(t)", 1), [-1.0])
        with pytest.raises(DomainError):
            eval_interval(parse("ln(t)", 1), [0.0])
        with pytest.raises(DomainError):
            eval_interval(parse("exp(exp(t))", 1), [10.0])


class TestEvalDual:
    def test_exponential_example(self):
        dual = eval_dual(parse("exp([-1,2]*t)", 1), [1.0])
        assert dual.branch_stable
        assert dual.lo_val == pytest.approx(1.0 / E)
        assert dual.hi_val == pytest.approx(E**2)
        assert dual.lo_grad == pytest.approx((-1.0 / E,))
        assert dual.hi_grad == pytest.approx((2.0 * E**2,))

    def test_values_match_interval_evaluation(self):
        e = parse("[-2,3]*x1*exp([-1,2]*x2)", 2)
        dual = eval_dual(e, [2.0, 2.0])
        value = eval_interval(e, [2.0, 2.0])
        assert (dual.lo_val, dual.hi_val) == (value.lo, value.hi)

    def test_gradients_of_two_variable_example(self):
        dual = eval_dual(parse("[1,4]*x1^2 + [0,1]*x2", 2), [1.0, 1.0])
        assert dual.lo_grad == pytest.approx((2.0, 0.0))
        assert dual.hi_grad == pytest.approx((8.0, 1.0))

    def test_tie_at_zero_crossing(self):
        dual = eval_dual(parse("exp([-1,2]*t)", 1), [0.0])
        assert not dual.branch_stable
        assert dual.tie_locations == ("scalar_mul@1",)

    def test_tie_on_two_variable_note_example(self):
        dual = eval_dual(parse("[1,2]*x1 + [0,1]*x2^2", 2), [0.0, 0.0])
        assert not dual.branch_stable
        assert "scalar_mul@1" in dual.tie_locations

    def test_equal_values_with_equal_slopes_are_not_a_tie(self):
        dual = eval_dual(parse("[1,3]*t^2", 1), [0.0])
        assert dual.branch_stable

    def test_negative_tie_tolerance(self):
        with pytest.raises(InvalidArgumentError):
            eval_dual(parse("t", 1), [0.0], tie_tol=-1.0)

    def test_sqrt_at_zero(self):
        with pytest.raises(DomainError):
            eval_dual(parse("sqrt(t^2)", 1), [0.0])

    def test_to_dict(self):
        payload = eval_dual(parse("exp([-1,2]*t)", 1), [1.0]).to_dict()
        assert set(payload) == {"lo_val", "hi_val", "lo_grad", "hi_grad", "branch_stable", "tie_locations"}


class TestEvalSeries:
    def test_exponential_derivatives(self):
        series = eval_series(parse("exp([-1,2]*t)", 1), [1.0], [1.0], 3)
        assert series.order == 3
        for k in range(4):
            d = series.derivative(k)
            expected = tuple(sorted(((-1.0) ** k / E, 2.0**k * E**2)))
            assert (d.lo, d.hi) == pytest.approx(expected)

    def test_direction_length(self):
        with pytest.raises(InvalidArgumentError):
            eval_series(parse("x1*x2", 2), [1.0, 1.0], [1.0], 2)


class TestBranchStability:
    def test_signature_is_constant_on_smooth_region(self):
        e = parse("exp([-1,2]*t)", 1)
        assert branch_signature(e, [1.0]) == branch_signature(e, [1.5])

    def test_second_order_tie(self):
        assert not point_is_stable(parse("[1,3]*t^2", 1), [0.0])
        assert point_is_stable(parse("[1,3]*t^2", 1), [1.0])

    def test_stable_box(self):
        report = branch_stability(parse("exp([-1,2]*t)", 1), [Interval(0.5, 1.5)])
        assert report.stable
        assert report.samples == 5
        assert report.signatures == 1

    def test_unstable_box(self):
        report = branch_stability(parse("[1,2]*x1 + [0,1]*x2^2", 2), [Interval(-1, 1), Interval(-1, 1)])
        assert not report
        assert report.unstable_points

    def test_domain_errors_are_collected(self):
        report = branch_stability(parse("ln(t)", 1), [Interval(0.0, 1.0)])
        assert not report.stable
        assert report.domain_errors[0][0] == (0.0,)

    def test_arguments(self):
        e = parse("t", 1)
        with pytest.raises(InvalidArgumentError):
            branch_stability(e, [Interval(0, 1), Interval(0, 1)])
        with pytest.raises(InvalidArgumentError):
            branch_stability(e, [Interval(0, 1)], samples=1)

    @pytest.mark.parametrize("samples", [4, 5, 6])
    def test_slope_ordering_flip_between_samples(self, samples):
        report = branch_stability(parse("[1,3]*x1^2", 1), [Interval(-1.0, 1.0)], samples)
        assert not report.stable
        assert len(report.order_flips) == 1
        assert report.order_flips[0][0] == pytest.approx(0.0, abs=1e-12)
        assert report.to_dict()["order_flips"] == [list(report.order_flips[0])]

    def test_slope_ordering_kept_on_one_side(self):
        report = branch_stability(parse("[1,3]*x1^2", 1), [Interval(0.25, 1.0)], 4)
        assert report.stable
        assert report.order_flips == ()


class TestEvenPowers:
    def test_base_pinned_at_zero_is_not_an_even_power_tie(self):
        series = eval_series(parse("([1,3]*t)^2", 1), [1e-14], [1.0], 2)
        assert not any(loc.startswith("int_pow") for loc in series.tie_locations)
        assert series.lo[2] == pytest.approx(1.0)
        assert series.hi[2] == pytest.approx(9.0)

    def test_one_endpoint_at_zero_is_a_tie(self):
        e = parse("([0,1]+t)^2", 1)
        assert eval_series(e, [0.0], [1.0], 2).tie_locations == ("int_pow@0",)
        assert eval_dual(e, [0.0]).branch_stable


def central_difference(e, p: tuple[float, ...], i: int, h: float) -> tuple[float, float]:
    up = eval_interval(e, perturb(p, i, h))
    down = eval_interval(e, perturb(p, i, -h))
    return (up.lo - down.lo) / (2.0 * h), (up.hi - down.hi) / (2.0 * h)


class TestGeneratedExpressions:
    @pytest.mark.parametrize("seed", [DEFAULT_SEED, 1, 2, 3, 4])
    def test_printer_rebuilds_generated_trees(self, seed):
        gen = ExpressionGenerator(seed)
        for arity in (1, 2, 3) * 40:
            e = gen.expr(arity)
            assert parse(to_text(e), arity) == e, e.text

    @pytest.mark.parametrize("seed", [DEFAULT_SEED, 1, 2])
    def test_dual_gradients_match_central_differences(self, seed):
        h = 1e-6
        for e, p in generate_bracket_cases(30, seed):
            dual = eval_dual(e, p)
            scale = 1.0 + abs(dual.lo_val) + abs(dual.hi_val)
            for i in range(1, e.arity + 1):
                lo_fd, hi_fd = central_difference(e, p.coords, i, h)
                assert abs(lo_fd - dual.lo_grad[i - 1]) <= 1e-6 * (scale + abs(dual.lo_grad[i - 1])), e.text
                assert abs(hi_fd - dual.hi_grad[i - 1]) <= 1e-6 * (scale + abs(dual.hi_grad[i - 1])), e.text
