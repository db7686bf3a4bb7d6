"""End-to-end checks over the worked examples and the seeded suite."""

import math

import pytest

from ivexpand.calculus import METHOD_NUMERIC, directional_derivs, partial_gh, partial_numeric
from ivexpand.corpus import EE, NOTE
from ivexpand.expansion import remainder_decay
from ivexpand.funcexpr import eval_dual
from ivexpand.interval import Interval, hausdorff
from ivexpand.verify import run_suite

E = math.e


@pytest.fixture(scope="module")
def suite():
    return {r.check_id: r for r in run_suite()}


class TestWorkedExamples:
    @pytest.mark.parametrize("n", range(7))
    def test_exponential_ladder(self, n):
        value = directional_derivs(EE.expr(), EE.point, [1.0], 6).values[n]
        a, b = (-1.0) ** n / E, 2.0**n * E**2
        assert value.lo == pytest.approx(min(a, b), rel=1e-9)
        assert value.hi == pytest.approx(max(a, b), rel=1e-9)

    def test_note_case(self):
        e = NOTE.expr()
        assert not eval_dual(e, NOTE.point).branch_stable
        result = partial_gh(e, 1, NOTE.point)
        assert result.method == METHOD_NUMERIC
        assert hausdorff(partial_numeric(e, 1, NOTE.point).value, Interval(1.0, 2.0)) <= 1e-6

    def test_remainder_decay(self):
        decay = [m for _, m in remainder_decay(EE.expr(), 1.0, 1.5, 15)]
        assert decay[-1] < 1e-3 * decay[0]
        tail = decay[7:]
        assert all(b < a for a, b in zip(tail, tail[1:]))


class TestSuite:
    def test_nothing_fails(self, suite):
        assert [cid for cid, r in suite.items() if not r.passed] == []

    def test_note_bracket_is_the_documented_skip(self, suite):
        assert suite["bracket.note"].skipped
        assert "branch tie" in suite["bracket.note"].reason

    def test_expansion_grid(self, suite):
        ee = [r for cid, r in suite.items() if cid.startswith("expansion.ee.")]
        ef = [r for cid, r in suite.items() if cid.startswith("expansion.ef.")]
        assert len(ee) == 9 and len(ef) == 9
        assert all(r.status == "PASS" for r in ee + ef)

    def test_generated_bracket_corpus(self, suite):
        report = suite["bracket.generated"]
        assert report.status == "PASS"
        assert report.samples >= 100

    @pytest.mark.parametrize("check_id", ["mvt.ee", "mvt.square", "rules.chain", "rules.sum-different", "forms.ef", "hessian.symmetry"])
    def test_reference_checks_pass(self, suite, check_id):
        assert suite[check_id].status == "PASS"

    def test_reports_are_sorted(self):
        first = [r.check_id for r in run_suite(threads=1)]
        assert first == sorted(first)
