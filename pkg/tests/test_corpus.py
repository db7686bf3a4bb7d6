"""Worked examples, seeded generators and corpus files."""

import pytest

from ivexpand.corpus import (
    EE,
    MIN_SEGMENT,
    NOTE,
    SMOOTH_EXAMPLES,
    ExpressionGenerator,
    generate_bracket_cases,
    generate_chain_cases,
    generate_mvt_cases,
    generate_product_cases,
    load_corpus,
    reference_corpus,
)
from ivexpand.errors import InvalidArgumentError, ParseError
from ivexpand.funcexpr import EvalPoint, eval_dual, is_real_valued


class TestWorkedExamples:
    def test_reference_corpus_is_smooth(self):
        cases = reference_corpus()
        assert len(cases) == len(SMOOTH_EXAMPLES)
        for e, p in cases:
            assert eval_dual(e, p).branch_stable

    def test_note_example_has_a_tie(self):
        e, p = NOTE.case()
        assert not eval_dual(e, p).branch_stable

    def test_case(self):
        e, p = EE.case()
        assert e.arity == 1
        assert p == EvalPoint((1.0,))


class TestGenerators:
    def test_same_seed_same_corpus(self):
        assert generate_bracket_cases(5, seed=7) == generate_bracket_cases(5, seed=7)

    def test_different_seed_different_corpus(self):
        assert generate_bracket_cases(5, seed=7) != generate_bracket_cases(5, seed=8)

    def test_bracket_cases_are_stable(self):
        for e, p in generate_bracket_cases(10, seed=3):
            assert e.arity in (1, 2)
            assert all(-1.0 <= c <= 1.0 for c in p)
            assert eval_dual(e, p).branch_stable

    def test_mvt_cases(self):
        for case in generate_mvt_cases(5, seed=3):
            assert case.expr.arity == 1
            assert case.beta - case.alpha >= MIN_SEGMENT

    def test_chain_cases(self):
        for case in generate_chain_cases(3, seed=3):
            assert case.outer.arity == 2
            assert all(is_real_valued(u) for u in case.inner)

    def test_product_cases(self):
        for case in generate_product_cases(3, seed=3):
            assert is_real_valued(case.multiplier)
            assert case.expr.arity == 1

    def test_generated_expressions_use_a_variable(self):
        gen = ExpressionGenerator(seed=11)
        for _ in range(20):
            assert "x" in gen.expr(2).text

    def test_max_depth(self):
        with pytest.raises(InvalidArgumentError):
            ExpressionGenerator(max_depth=0)


class TestLoadCorpus:
    def test_lines_and_points(self, tmp_path):
        path = tmp_path / "corpus.txt"
        path.write_text("# comment\nexp([-1,2]*t)\n\n[1,3]*t^2\n", encoding="utf-8")
        cases = load_corpus(path, 1, points=[[1.0], [2.0]])
        assert [e.text for e, _ in cases] == ["exp([-1,2]*t)", "[1,3]*t^2"]
        assert [p.coords for _, p in cases] == [(1.0,), (2.0,)]

    def test_seeded_points(self, tmp_path):
        path = tmp_path / "corpus.txt"
        path.write_text("x1 + x2\nx1*x2\n", encoding="utf-8")
        first = load_corpus(path, 2, seed=5)
        assert first == load_corpus(path, 2, seed=5)
        assert all(-1.0 <= c <= 1.0 for _, p in first for c in p)

    def test_errors(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            load_corpus(tmp_path / "missing.txt", 1)
        path = tmp_path / "corpus.txt"
        path.write_text("t\n", encoding="utf-8")
        with pytest.raises(InvalidArgumentError):
            load_corpus(path, 1, points=[[0.0], [1.0]])
        path.write_text("exp(\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_corpus(path, 1)
