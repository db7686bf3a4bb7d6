"""gH partials, higher orders, μ-monotonicity and the algebra rules."""

import math

import numpy as np
import pytest

from ivexpand.calculus import (
    CONSTANT_SPREAD_NOTE,
    METHOD_AD,
    METHOD_NUMERIC,
    MU_DECREASING,
    MU_INCREASING,
    NON_MU_MONOTONIC,
    UNKNOWN,
    chain_endpoint_gradients,
    chain_gradient,
    derivative_tensor,
    directional_derivs,
    gradient,
    hessian,
    inner_jacobian,
    mu_classify,
    neighbourhood_stable,
    partial_gh,
    partial_numeric,
    real_product_derivative,
)
from ivexpand.corpus import BRACKET_CASES, ExpressionGenerator, generate_bracket_cases
from ivexpand.errors import (
    DerivativeUndefinedError,
    HessianUndefinedError,
    InvalidArgumentError,
    MathematicalError,
    PreconditionViolatedError,
)
from ivexpand.funcexpr import combine, parse
from ivexpand.interval import Interval, hausdorff, magnitude, scalar_mul

E = math.e

EE = parse("exp([-1,2]*t)", 1)
EF = parse("[-2,3]*x1*exp([-1,2]*x2)", 2)
INTRO = parse("[1,4]*x1^2 + [0,1]*x2", 2)
NOTE = parse("[1,2]*x1 + [0,1]*x2^2", 2)
CUBIC = parse("[1,2]*x1^3*exp([1,2]*x2)", 2)


def assert_interval(actual: Interval, lo: float, hi: float, rel: float = 1e-9, abs_: float = 1e-12):
    assert actual.lo == pytest.approx(lo, rel=rel, abs=abs_)
    assert actual.hi == pytest.approx(hi, rel=rel, abs=abs_)


class TestPartials:
    def test_bracket_of_endpoint_partials(self):
        result = partial_gh(EE, 1, [1.0])
        assert result.method == METHOD_AD
        assert result.branch_stable
        assert_interval(result.value, -1.0 / E, 2.0 * E**2)

    def test_two_variable_partials(self):
        assert_interval(partial_gh(INTRO, 1, [1.0, 1.0]).value, 2.0, 8.0)
        assert_interval(partial_gh(INTRO, 2, [1.0, 1.0]).value, 0.0, 1.0)

    def test_numeric_quotient_agrees_with_ad(self):
        result = partial_numeric(EE, 1, [1.0])
        assert result.method == METHOD_NUMERIC
        assert_interval(result.value, -1.0 / E, 2.0 * E**2, rel=1e-6)

    def test_tie_falls_back_to_numeric(self, log_messages):
        result = partial_gh(NOTE, 1, [0.0, 0.0])
        assert result.method == METHOD_NUMERIC
        assert not result.branch_stable
        assert_interval(result.value, 1.0, 2.0, rel=1e-6)
        assert any("Branch tie" in m for m in log_messages)

    def test_one_sided_endpoint_slopes(self):
        slopes = partial_numeric(NOTE, 1, [0.0, 0.0]).endpoint_slopes
        assert slopes["lo_left"] == pytest.approx(2.0)
        assert slopes["lo_right"] == pytest.approx(1.0)
        assert slopes["hi_left"] == pytest.approx(1.0)
        assert slopes["hi_right"] == pytest.approx(2.0)

    def test_kink_has_no_gh_partial(self):
        with pytest.raises(DerivativeUndefinedError) as info:
            partial_numeric(parse("sqrt(t^2)", 1), 1, [0.0])
        assert info.value.left.hi == pytest.approx(-1.0)
        assert info.value.right.lo == pytest.approx(1.0)
        assert isinstance(info.value, MathematicalError)

    def test_kink_without_endpoint_jets_falls_back(self, log_messages):
        with pytest.raises(DerivativeUndefinedError):
            partial_gh(parse("sqrt(t^2)", 1), 1, [0.0])
        assert any("do not exist" in m for m in log_messages)

    @pytest.mark.parametrize("kwargs", [{"halvings": 2}, {"h0": -1.0}, {"conv_tol": -1.0}])
    def test_numeric_arguments(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            partial_numeric(EE, 1, [1.0], **kwargs)

    def test_axis_range(self):
        with pytest.raises(InvalidArgumentError):
            partial_gh(EE, 2, [1.0])

    def test_gradient(self):
        grad = gradient(EF, [2.0, 2.0])
        assert_interval(grad[0], -2.0 * E**4, 3.0 * E**4)
        assert_interval(grad[1], -8.0 * E**4, 12.0 * E**4)

    def test_to_dict(self):
        payload = partial_numeric(NOTE, 1, [0.0, 0.0]).to_dict()
        assert payload["method"] == METHOD_NUMERIC
        assert len(payload["lateral"]) == 2


class TestHigherOrders:
    def test_hessian_of_cubic_example(self):
        h = hessian(CUBIC, [-1.0, -1.0])
        assert_interval(h[0, 0], -12.0 / E, -6.0 / E**2, rel=1e-7)
        assert_interval(h[0, 1], 6.0 / E**2, 6.0 / E, rel=1e-7)
        assert_interval(h[1, 1], -2.0 / E, -4.0 / E**2, rel=1e-7)
        assert h[0, 1] == h[1, 0]

    def test_hessian_of_two_variable_example(self):
        h = hessian(EF, [2.0, 2.0])
        assert_interval(h[0, 0], 0.0, 0.0, abs_=1e-6)
        assert_interval(h[0, 1], -4.0 * E**4, 6.0 * E**4, rel=1e-7)
        assert_interval(h[1, 1], -16.0 * E**4, 24.0 * E**4, rel=1e-7)

    def test_hessian_undefined_across_branch_switch(self, log_messages):
        with pytest.raises(HessianUndefinedError):
            hessian(NOTE, [0.0, 0.0])
        assert any("falling back" in m for m in log_messages)

    def test_third_order_tensor(self):
        tensor = derivative_tensor(CUBIC, [-1.0, -1.0], 3)
        assert tensor.branch_stable
        # lower endpoint 2·x1³·exp(x2), upper x1³·exp(2·x2)
        assert_interval(tensor[(1, 1, 1)], 6.0 / E**2, 12.0 / E, rel=1e-6)
        assert tensor[(1, 2, 1)] == tensor[(1, 1, 2)]

    @pytest.mark.parametrize("order", [0, 4])
    def test_tensor_order_range(self, order):
        with pytest.raises(InvalidArgumentError):
            derivative_tensor(EF, [2.0, 2.0], order)

    def test_directional_ladder(self):
        ladder = directional_derivs(EE, [1.0], [1.0], 3)
        assert ladder.branch_stable
        assert len(ladder) == 4
        for k, value in enumerate(ladder):
            lo, hi = sorted(((-1.0) ** k / E, 2.0**k * E**2))
            assert_interval(value, lo, hi)

    def test_directional_ladder_warns_on_switch(self, log_messages):
        ladder = directional_derivs(EE, [0.0], [1.0], 2)
        assert not ladder.branch_stable
        assert ladder.warnings
        assert log_messages

    def test_directional_order_range(self):
        with pytest.raises(InvalidArgumentError):
            directional_derivs(EE, [1.0], [1.0], 17)

    def test_neighbourhood_stability(self):
        assert neighbourhood_stable(EE, [1.0])
        assert not neighbourhood_stable(EE, [0.0])


class TestMonotonicity:
    def test_increasing(self):
        report = mu_classify(EE, 1, [Interval(0.5, 1.5)])
        assert report.verdict == MU_INCREASING
        assert report.strict
        assert report.is_monotone
        assert report.stable_samples == 9

    def test_decreasing(self):
        report = mu_classify(parse("[0,1]*(1-t)", 1), 1, [Interval(0.0, 0.5)])
        assert report.verdict == MU_DECREASING
        assert report.strict

    def test_constant_spread(self):
        report = mu_classify(parse("[1,2] + t", 1), 1, [Interval(-1.0, 1.0)])
        assert report.verdict == MU_INCREASING
        assert report.is_constant_spread
        assert CONSTANT_SPREAD_NOTE in report.to_dict()["notes"]
        assert not report.strict

    def test_sign_change_is_located(self):
        report = mu_classify(parse("[0,1]*t^2", 1), 1, [Interval(-1.0, 1.0)], grid=9)
        assert report.verdict == NON_MU_MONOTONIC
        assert not report.is_monotone
        assert report.split_points == ((0.0,),)

    def test_too_few_usable_samples(self):
        report = mu_classify(parse("ln(t)", 1), 1, [Interval(-1.0, 1.0)], grid=9)
        assert report.verdict == UNKNOWN
        assert report.stable_samples == 4

    def test_arguments(self):
        with pytest.raises(InvalidArgumentError):
            mu_classify(EE, 1, [Interval(0, 1)], grid=2)
        with pytest.raises(InvalidArgumentError):
            mu_classify(EE, 1, [Interval(0, 1), Interval(0, 1)])


class TestRules:
    OUTER = parse("[1,2]*x1 + [0,1]*x2", 2)

    def test_chain_gradient(self):
        inner = (parse("t^2", 1), parse("t^3", 1))
        grad = chain_gradient(self.OUTER, inner, [1.0])
        assert len(grad) == 1
        assert_interval(grad[0], 2.0, 7.0)

    def test_chain_endpoint_gradients(self):
        inner = (parse("t^2", 1), parse("t^3", 1))
        lo, hi = chain_endpoint_gradients(self.OUTER, inner, [1.0])
        np.testing.assert_allclose(lo, [2.0])
        np.testing.assert_allclose(hi, [7.0])

    def test_chain_warns_on_mixed_contributions(self, log_messages):
        inner = (parse("t", 1), parse("2 - t", 1))
        grad = chain_gradient(self.OUTER, inner, [1.0])
        assert_interval(grad[0], 0.0, 2.0)
        assert any("differently μ-monotone" in m for m in log_messages)

    def test_chain_needs_real_inner(self):
        with pytest.raises(InvalidArgumentError):
            chain_gradient(self.OUTER, (parse("[0,1]*t", 1), parse("t", 1)), [1.0])
        with pytest.raises(InvalidArgumentError):
            chain_gradient(self.OUTER, (parse("t", 1),), [1.0])

    def test_chain_endpoint_gradients_at_tie(self):
        inner = (parse("t", 1), parse("t", 1))
        with pytest.raises(DerivativeUndefinedError):
            chain_endpoint_gradients(NOTE, inner, [0.0])

    def test_product_rule(self):
        assert_interval(real_product_derivative(parse("2 - t", 1), EE, [1.0]), -2.0 / E, E**2)
        assert_interval(real_product_derivative(parse("1", 1), EE, [1.0]), -1.0 / E, 2.0 * E**2)

    def test_product_rule_needs_mu_monotone_factor(self):
        with pytest.raises(PreconditionViolatedError):
            real_product_derivative(parse("t", 1), parse("[0,1]*t^2", 1), [0.0])

    def test_product_rule_arguments(self):
        with pytest.raises(InvalidArgumentError):
            real_product_derivative(parse("[0,1]*t", 1), EE, [1.0])
        with pytest.raises(InvalidArgumentError):
            real_product_derivative(parse("t", 1), EF, [1.0, 1.0])

    def test_inner_jacobian(self):
        inner = (parse("t^2", 1), parse("t^3", 1))
        point, x0, du = inner_jacobian(self.OUTER, inner, [2.0])
        assert point.coords == (2.0,)
        assert x0 == (4.0, 8.0)
        np.testing.assert_allclose(du, [[4.0], [12.0]])

    def test_inner_jacobian_needs_real_inner(self):
        with pytest.raises(InvalidArgumentError):
            inner_jacobian(self.OUTER, (parse("[0,1]*t", 1), parse("t", 1)), [1.0])


@pytest.fixture(scope="module")
def bracket_cases():
    return generate_bracket_cases()


class TestGeneratedProperties:
    @pytest.mark.parametrize("start", range(0, BRACKET_CASES, 50))
    def test_ad_partial_matches_numeric_quotient(self, bracket_cases, start):
        for e, p in bracket_cases[start : start + 50]:
            for i in range(1, e.arity + 1):
                ad = partial_gh(e, i, p)
                assert ad.method == METHOD_AD, e.text
                numeric = partial_numeric(e, i, p).value
                assert hausdorff(ad.value, numeric) <= 1e-6 * (1.0 + magnitude(ad.value)), e.text

    @pytest.mark.parametrize("seed", range(5))
    def test_positive_homogeneity(self, bracket_cases, seed):
        rng = np.random.default_rng(seed)
        for e, p in bracket_cases[seed * 10 : seed * 10 + 10]:
            lam = float(rng.uniform(0.1, 4.0))
            scaled = parse(f"{lam!r}*({e.text})", e.arity)
            for i in range(1, e.arity + 1):
                expected = scalar_mul(lam, partial_gh(e, i, p).value)
                actual = partial_gh(scaled, i, p).value
                assert hausdorff(actual, expected) <= 1e-9 * (1.0 + magnitude(expected)), e.text

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize(
        "text, box",
        [
            ("exp([-1,2]*t)", Interval(0.5, 1.5)),
            ("[0,1]*(1-t)", Interval(0.0, 0.5)),
            ("[1,2] + t", Interval(-1.0, 1.0)),
            ("[0,1]*t^2", Interval(-1.0, 1.0)),
        ],
    )
    def test_adding_a_real_function_keeps_the_verdict(self, seed, text, box):
        f = parse(text, 1)
        g = ExpressionGenerator(seed, max_depth=3).expr(1, real_only=True)
        plain = mu_classify(f, 1, [box])
        shifted = mu_classify(combine("add", f, g), 1, [box])
        assert shifted.verdict == plain.verdict, g.text
        assert shifted.is_constant_spread == plain.is_constant_spread
        assert len(shifted.split_points) == len(plain.split_points)
        for moved, original in zip(shifted.split_points, plain.split_points):
            assert moved == pytest.approx(original, abs=1e-6)
