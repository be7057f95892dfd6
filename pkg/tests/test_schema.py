"""Tests for the path ordering and the computability closure."""

import pytest

from cacheck.schema import cc_check, general_schema_check, multiset_eq, multiset_gt, rpo_gt, sp_gt, status_compare
from cacheck.signature import Status
from cacheck.syntax import parse_term
from cacheck.term import App, Symb, Var
from cacheck.typecheck import EMPTY_ENV


def int_gt(a, b):
    return a > b


def int_eq(a, b):
    return a == b


class TestMultiset:
    def test_greater(self):
        assert multiset_gt([3, 1], [2, 2, 1], int_gt, int_eq)

    def test_equal_is_not_greater(self):
        assert not multiset_gt([1], [1], int_gt, int_eq)
        assert multiset_eq([1, 2], [2, 1], int_eq)

    def test_smaller(self):
        assert not multiset_gt([2], [3], int_gt, int_eq)

    def test_lexicographic_status(self):
        status = Status(((1,), (2,)))
        assert status_compare(status, int_gt, [1, 5], [1, 3], int_eq)
        assert not status_compare(status, int_gt, [1, 5], [2, 0], int_eq)

    def test_status_needs_arguments(self):
        with pytest.raises(ValueError):
            status_compare(Status(((1, 2),)), int_gt, [1], [1], int_eq)


class TestRpo:
    def test_decreasing_rules(self, system, corpus):
        division = system("division.cac")
        assert rpo_gt(division.signature, division.rule("minus.3").lhs, division.rule("minus.3").rhs)
        assert rpo_gt(corpus.signature, corpus.rule("eq.4").lhs, corpus.rule("eq.4").rhs)
        assert rpo_gt(corpus.signature, corpus.rule("plus.5").lhs, corpus.rule("plus.5").rhs)

    def test_division_is_not_decreasing(self, system):
        division = system("division.cac")
        rule = division.rule("div.2")
        assert not rpo_gt(division.signature, rule.lhs, rule.rhs)

    def test_variable(self, arith):
        x = Var("x")
        assert rpo_gt(arith.signature, App(Symb("s"), x), x)
        assert not rpo_gt(arith.signature, x, x)


class TestClosure:
    def test_structural_call(self, corpus):
        verdict = general_schema_check(corpus.signature, corpus.rule("app.2"))
        assert verdict.held
        assert "app A l l' < app A (cons A' x l) l'" in verdict.reason

    def test_every_corpus_rule(self, corpus):
        for rule in corpus.rules:
            assert general_schema_check(corpus.signature, rule, corpus.fragment(rule)).held, rule.name

    def test_strictly_positive_descent(self, system):
        ordinal = system("ordinal.cac")
        sig = ordinal.signature
        rule = ordinal.rule("add.3")
        f = next(x for x in rule.env.domain if x.name == "f")
        ord_ = Symb("ord")
        assert sp_gt(sig, rule, (rule.args[1], ord_), (App(f, Var("n")), ord_))
        assert general_schema_check(sig, rule, ordinal.fragment(rule)).held

    def test_partial_call(self, system):
        cont = system("cont.cac")
        verdict = general_schema_check(cont.signature, cont.rule("ex.2"))
        assert verdict.failed
        assert "partial" in verdict.reason

    def test_non_decreasing_call(self, system):
        division = system("division.cac")
        verdict = general_schema_check(division.signature, division.rule("div.2"))
        assert verdict.failed
        assert "does not decrease" in verdict.reason

    def test_symbol_not_below_head(self, arith):
        rule = arith.rule("le.3")
        t = parse_term(arith, "plus 0 0")
        assert cc_check(arith.signature, rule, EMPTY_ENV, t, Symb("nat")).failed

    def test_variable_outside_closure(self, arith):
        rule = arith.rule("le.1")
        assert cc_check(arith.signature, rule, EMPTY_ENV, Var("z"), Symb("nat")).failed
