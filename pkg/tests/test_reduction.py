"""Tests for matching, normalization and critical pairs."""

import pytest

from cacheck.errors import OutOfFuel
from cacheck.reduction import (EMPTY, RewriteSystem, critical_pairs, joinable, match_algebraic, normalize,
                               one_step_reducts, weak_head_normalize)
from cacheck.syntax import parse_env, parse_term
from cacheck.term import Abs, App, Symb, Var, mk_app

nat, zero, s = Symb("nat"), Symb("0"), Symb("s")
x, y = Var("x"), Var("y")

NON_CONFLUENT = """
symb nat : *
symb 0 : nat
symb s : nat -> nat
symb f : nat -> nat
rule f (s x) --> 0
rule f x --> s 0
prec f > s 0
"""

CURRIED = """
symb nat : *
symb 0 : nat
symb s : nat -> nat
symb f : nat -> nat -> nat
rule f x --> s
rule f x y --> y
prec f > s
"""


class TestMatch:
    def test_binds_variables(self):
        plus = Symb("plus")
        sigma = match_algebraic(mk_app(plus, [zero, y]), mk_app(plus, [zero, App(s, zero)]))
        assert sigma == {y: App(s, zero)}

    def test_symbol_mismatch(self):
        assert match_algebraic(App(s, x), zero) is None

    def test_non_linear(self):
        eq = Symb("eq")
        lhs = mk_app(eq, [x, x])
        assert match_algebraic(lhs, mk_app(eq, [zero, App(s, zero)])) is None
        assert match_algebraic(lhs, mk_app(eq, [zero, zero])) == {x: zero}


class TestNormalize:
    def test_addition(self, arith):
        t = parse_term(arith, "plus (s (s 0)) (s (s 0))")
        assert str(normalize(arith.rewrite_system, t)) == "s (s (s (s 0)))"

    def test_strategies_agree(self, arith):
        t = parse_term(arith, "le (plus (s 0) (s 0)) (s (s (s 0)))")
        inner = normalize(arith.rewrite_system, t, strategy="innermost")
        outer = normalize(arith.rewrite_system, t, strategy="outermost")
        assert inner == outer == Symb("true")

    def test_open_term_single_step(self, arith):
        env = parse_env(arith, "n : nat")
        t = parse_term(arith, "plus n 0", env)
        trace = []
        assert normalize(arith.rewrite_system, t, trace=trace) == Var("n")
        assert len(trace) == 1
        assert trace[0].tag == "plus.3"

    def test_beta(self):
        t = App(Abs(x, nat, App(s, x)), zero)
        assert normalize(EMPTY, t) == App(s, zero)
        assert normalize(EMPTY, t, beta=False) == t

    def test_out_of_fuel(self, arith):
        t = parse_term(arith, "plus (s (s 0)) (s (s 0))")
        with pytest.raises(OutOfFuel) as e:
            normalize(arith.rewrite_system, t, fuel=1)
        assert e.value.fuel == 1

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            normalize(EMPTY, zero, strategy="random")

    def test_weak_head(self, arith):
        t = parse_term(arith, "plus (s 0) (plus 0 0)")
        assert str(weak_head_normalize(arith.rewrite_system, t)) == "s (plus 0 (plus 0 0))"

    def test_comparison(self, arith):
        t = parse_term(arith, "le (s 0) (s (s 0))")
        assert normalize(arith.rewrite_system, t) == Symb("true")

    def test_map_step(self, system):
        fixedlist = system("fixedlist.cac")
        env = parse_env(fixedlist, "f : nat -> nat, x : nat, n : nat, l : list n")
        t = parse_term(fixedlist, "map f (s n) (cons x n l)", env)
        expected = parse_term(fixedlist, "cons (f x) n (map f n l)", env)
        assert one_step_reducts(fixedlist.rewrite_system, t) == [(expected, "map.2", ())]


class TestOneStep:
    def test_beta_redex(self):
        t = App(Abs(x, nat, x), zero)
        assert one_step_reducts(EMPTY, t) == [(zero, "beta", ())]

    def test_normal_form_has_no_reducts(self, arith):
        assert one_step_reducts(arith.rewrite_system, zero) == []

    def test_every_position(self, arith):
        t = parse_term(arith, "plus (plus 0 0) 0")
        tags = sorted(tag for _, tag, _ in one_step_reducts(arith.rewrite_system, t))
        assert tags == ["plus.1", "plus.3", "plus.3"]


class TestCriticalPairs:
    def test_single_rule(self, arith):
        R = RewriteSystem([arith.rule("plus.1")])
        assert critical_pairs(R) == []

    def test_overlapping_rules_are_joinable(self, arith):
        R = arith.rewrite_system
        pairs = critical_pairs(R)
        assert len(pairs) == 4
        assert all(joinable(R, cp.left, cp.right).held for cp in pairs)

    def test_among_filters_rules(self, arith):
        pairs = critical_pairs(arith.rewrite_system, among=["le.1"])
        assert pairs == []

    def test_non_joinable(self, from_text):
        system = from_text(NON_CONFLUENT)
        R = system.rewrite_system
        pairs = critical_pairs(R)
        assert pairs
        assert any(joinable(R, cp.left, cp.right).failed for cp in pairs)

    def test_joinable_distinct_normal_forms(self):
        assert joinable(EMPTY, zero, App(s, zero)).failed

    def test_rewrite_system_index(self, arith):
        assert arith.rewrite_system.heads == {"plus", "le"}
        assert len(arith.rewrite_system.restrict(["le"])) == 3

    def test_different_arities(self, from_text):
        system = from_text(CURRIED)
        R = system.rewrite_system
        pairs = critical_pairs(R)
        assert [cp.rules for cp in pairs] == [("f.1", "f.2")]
        cp = pairs[0]
        assert cp.position == ()
        assert joinable(R, cp.left, cp.right).failed
        t = parse_term(system, "f 0 0")
        assert sorted(str(u) for u, _, _ in one_step_reducts(R, t)) == ["0", "s 0"]

    def test_shorter_rule_below_root(self, from_text):
        system = from_text(CURRIED + "symb g : nat -> nat\nrule g (f x y) --> x\nprec g > f\n")
        pairs = critical_pairs(system.rewrite_system, among=["g.1"])
        assert {cp.rules for cp in pairs} == {("f.1", "g.1"), ("f.2", "g.1")}


class TestNonTermination:
    def test_negative_constructor_loops(self, system):
        mendler = system("mendler.cac")
        w = "([x : T] p x x)"
        t = parse_term(mendler, f"{w} (c {w})")
        with pytest.raises(OutOfFuel):
            normalize(mendler.rewrite_system, t, fuel=50)
