"""Tests for signature elaboration, precedences, statuses and inductive predicates."""

import pytest

from cacheck.errors import SignatureError
from cacheck.signature import (PredicateClass, Precedence, Status, admissible_check, classify_predicate,
                               strictly_positive_positions)
from cacheck.term import Symb

NAT = """
symb nat : *
symb 0 : nat
symb s : nat -> nat
"""


class TestElaborate:
    def test_definedness(self, arith):
        sig = arith.signature
        assert sig.is_defined("plus")
        assert not sig.is_defined("s")
        assert sig["plus"].arity == 2
        assert sig["plus"].definedness == "defined"

    def test_precedence_violation(self, from_text):
        text = NAT + "symb double : nat -> nat\nrule double (s x) --> s (s (double x))\n"
        with pytest.raises(SignatureError, match="precedence violation"):
            from_text(text)

    def test_unsorted_type(self, from_text):
        with pytest.raises(SignatureError, match="not sorted"):
            from_text(NAT + "symb f : 0\n")

    def test_duplicate_symbol(self, from_text):
        with pytest.raises(SignatureError, match="declared twice"):
            from_text(NAT + "symb nat : *\n")

    def test_too_many_arguments(self, from_text):
        with pytest.raises(SignatureError, match="takes 1 arguments"):
            from_text(NAT + "rule s x 0 --> x\n")

    def test_mon_on_defined_symbol(self, from_text):
        with pytest.raises(SignatureError, match="not a constant predicate"):
            from_text(NAT + "symb f : nat -> nat\nrule f x --> x\nmon f = {1}\n")

    def test_acc_out_of_range(self, from_text):
        with pytest.raises(SignatureError, match="indices must lie"):
            from_text(NAT + "acc s = {2}\n")

    def test_output(self, corpus):
        sig = corpus.signature
        assert sig.output("cons")[0] == "list"
        assert sig.output("eq") is None
        assert sig.producers("list") == ["nil", "cons", "app"]
        assert sig.constructors("list") == ["nil", "cons"]


class TestPrecedence:
    def test_transitive(self):
        prec = Precedence(["f", "g", "h"])
        prec.add("f", ">", "g")
        prec.add("g", ">", "h")
        assert prec.gt("f", "h")
        assert not prec.gt("h", "f")
        assert prec.ge("f", "f")

    def test_equivalence(self):
        prec = Precedence(["f", "g"])
        prec.add("f", "=", "g")
        assert prec.eq("f", "g")
        assert not prec.gt("f", "g")
        assert prec.equivalence_class("f") == {"f", "g"}

    def test_strict_cycle(self):
        prec = Precedence(["f", "g"])
        prec.add("f", ">", "g")
        prec.add("g", ">", "f")
        with pytest.raises(SignatureError, match="well-founded"):
            prec.check()

    def test_unknown_operator(self):
        with pytest.raises(SignatureError):
            Precedence(["f", "g"]).add("f", "<", "g")


class TestStatus:
    def test_declared(self, corpus):
        assert corpus.signature.status_of("plus") == Status(((1,), (2,)))

    def test_default_over_inductive_arguments(self, corpus):
        assert corpus.signature.status_of("len") == Status(((2,),))
        assert str(corpus.signature.status_of("app")) == "lex (mul x2)"

    def test_select(self):
        status = Status(((2,), (1, 3)))
        assert status.arity == 3
        assert status.select(["a", "b", "c"]) == [["b"], ["a", "c"]]

    def test_empty_group(self):
        with pytest.raises(SignatureError):
            Status(((),))


class TestInductive:
    def test_default_accessibility(self, corpus):
        sig = corpus.signature
        assert sig.acc_of("cons") == {1, 2, 3}
        assert sig.acc_of("len") == frozenset()
        assert sig.acc_of("eq") == frozenset()

    def test_mon(self, corpus):
        assert corpus.signature.mon_of("list") == {1}

    def test_classes(self, system):
        assert classify_predicate(system("fixedlist.cac").signature, "list") is PredicateClass.PRIMITIVE
        assert classify_predicate(system("corpus.cac").signature, "list") is PredicateClass.BASIC
        assert classify_predicate(system("corpus.cac").signature, "nat") is PredicateClass.PRIMITIVE
        assert classify_predicate(system("ordinal.cac").signature, "ord") is PredicateClass.STRICTLY_POSITIVE
        assert classify_predicate(system("mendler.cac").signature, "T") is PredicateClass.GENERAL

    def test_strictly_positive_positions(self, system):
        sp = strictly_positive_positions(system("ordinal.cac").signature, "add")
        assert sp == {1: Symb("ord")}

    def test_admissible(self, corpus):
        found = admissible_check(corpus.signature)
        assert found
        assert all(v.held for v in found.values())
        assert found["I6/cons/2"].reason == "A->1"

    def test_negative_occurrence(self, system):
        found = admissible_check(system("mendler.cac").signature)
        assert found["I3/c/1"].failed
        assert found["I4/c/1"].held
