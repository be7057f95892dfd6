"""Tests for type inference, conversion and term classification."""

import pytest

from cacheck.errors import InvalidPosition, TypingError
from cacheck.syntax import parse_env, parse_term
from cacheck.term import BOX, STAR, Abs, App, Symb, Var, arrow, mk_app
from cacheck.typecheck import (EMPTY_ENV, TermClass, TypeChecker, canonical_type, check, classify, derived_type,
                               infer, is_bad_kind, rhs_shape_check)

nat, zero, s = Symb("nat"), Symb("0"), Symb("s")
x = Var("x")


class TestCheck:
    def test_constant(self, arith):
        assert check(arith.signature, None, zero, nat).held

    def test_wrong_type(self, arith):
        assert check(arith.signature, None, zero, arrow(nat, nat)).failed

    def test_application(self, arith):
        assert infer(arith.signature, None, App(s, zero)) == nat

    def test_unbound_variable(self, arith):
        with pytest.raises(TypingError):
            infer(arith.signature, None, x)

    def test_beta_conversion(self, arith):
        assert check(arith.signature, None, App(Abs(x, nat, x), zero), nat).held

    def test_abstraction_type(self, arith):
        T = infer(arith.signature, None, Abs(x, nat, App(s, x)))
        assert str(T) == "nat -> nat"

    def test_polymorphic_application(self, corpus):
        t = parse_term(corpus, "cons nat 0 (nil nat)")
        assert str(infer(corpus.signature, None, t)) == "list nat"

    def test_conversion_uses_rules(self, system):
        fixedlist = system("fixedlist.cac")
        env = parse_env(fixedlist, "n : nat, l : list n")
        l = parse_term(fixedlist, "l", env)
        T = parse_term(fixedlist, "list (plus 0 n)", env)
        assert check(fixedlist.signature, env, l, T, fixedlist.rewrite_system).held
        assert check(fixedlist.signature, env, l, T).failed


class TestEnvironment:
    def test_duplicate_binding(self):
        env = EMPTY_ENV.extend(x, nat)
        with pytest.raises(TypingError):
            env.extend(x, nat)

    def test_same_name_other_sort(self):
        env = EMPTY_ENV.extend(Var("x", BOX), STAR)
        with pytest.raises(TypingError):
            env.extend(x, nat)

    def test_check_env_rejects_non_type(self, arith):
        env = EMPTY_ENV.extend(x, zero)
        with pytest.raises(TypingError):
            TypeChecker(arith.signature).check_env(env)

    def test_str(self):
        assert str(EMPTY_ENV) == "(empty)"
        assert str(EMPTY_ENV.extend(x, nat)) == "x : nat"


class TestDerivedTypes:
    def test_canonical_type(self, arith):
        assert canonical_type(arith.signature, parse_term(arith, "plus 0 (s 0)")) == nat

    def test_derived_type_of_argument(self, corpus):
        rule = corpus.rule("app.1")
        assert str(derived_type(corpus.signature, rule.lhs, (2,))) == "list A"

    def test_root_has_no_derived_type(self, corpus):
        rule = corpus.rule("app.1")
        with pytest.raises(InvalidPosition):
            derived_type(corpus.signature, rule.lhs, ())

    def test_derived_types_below_constructor(self, system):
        fixedlist = system("fixedlist.cac")
        lhs = fixedlist.rule("app.2").lhs
        sig = fixedlist.signature
        cons_x, cons_l = (1, 1, 2, 1, 1, 2), (1, 1, 2, 2)
        assert str(derived_type(sig, lhs, cons_x)) == "nat"
        assert str(derived_type(sig, lhs, cons_l)) == "list n"


class TestClassify:
    def test_classes(self, arith):
        sig = arith.signature
        assert classify(sig, None, zero) is TermClass.OBJECT
        assert classify(sig, None, nat) is TermClass.PREDICATE
        assert classify(sig, None, STAR) is TermClass.KIND
        assert classify(sig, None, arrow(nat, STAR)) is TermClass.KIND
        assert classify(sig, None, BOX) is TermClass.TOP_SORT

    def test_bad_kind(self):
        assert is_bad_kind(App(Var("f"), STAR))
        assert not is_bad_kind(App(s, zero))

    def test_rhs_shape(self, corpus):
        sig = corpus.signature
        assert rhs_shape_check(sig, App(s, zero)).held
        assert rhs_shape_check(sig, STAR).failed
        assert rhs_shape_check(sig, Abs(x, nat, Symb("top")), "type").failed

    def test_type_level_variable(self):
        P = Var("P", BOX)
        assert rhs_shape_check(None, P, "type").failed
        assert rhs_shape_check(None, P, "type", mk_app(Symb("or"), [P, Symb("bot")])).held
        nested = mk_app(Symb("or"), [App(Symb("not"), P), Symb("bot")])
        assert rhs_shape_check(None, P, "type", nested).failed
        assert rhs_shape_check(None, P).held
