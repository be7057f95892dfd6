"""Tests for the command-line interface."""

import json
import os

import pytest

from cacheck.main import cli, parse_partition, resolve_path


class TestCheck:
    def test_holds(self, capsys):
        assert cli(["check", "corpus.cac"]) == 0
        assert capsys.readouterr().out.rstrip().endswith("overall: holds")

    def test_recursion_under_limit(self, capsys):
        assert cli(["check", "ordinal.cac"]) == 0

    def test_fails(self, capsys):
        assert cli(["check", "mendler.cac"]) == 1
        assert "A2/I3/c/1" in capsys.readouterr().out

    def test_json(self, capsys):
        assert cli(["check", "arith.cac", "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["overall"]["outcome"] == "holds"
        assert report["partition"]["fw"] == ["le", "plus"]

    def test_report_is_json(self, capsys):
        assert cli(["report", "girard.cac"]) == 1
        report = json.loads(capsys.readouterr().out)
        assert report["verdicts"]["A1"]["outcome"] == "undecided"

    def test_assumption_and_strict(self, capsys):
        assert cli(["check", "division.cac"]) == 1
        assert cli(["check", "division.cac", "--assume", "fo-termination"]) == 2
        assert cli(["check", "division.cac", "--assume", "fo-termination", "--strict"]) == 1

    def test_declared_partition(self, capsys):
        assert cli(["check", "corpus.cac", "--partition", "f1=eq"]) == 0
        assert "(declared)" in capsys.readouterr().out

    def test_unknown_partition_symbol(self, capsys):
        assert cli(["check", "corpus.cac", "--partition", "f1=nope"]) == 3
        assert capsys.readouterr().err.startswith("error:")

    def test_unknown_assumption(self):
        with pytest.raises(SystemExit):
            cli(["check", "corpus.cac", "--assume", "everything"])


class TestErrors:
    def test_missing_file(self, capsys):
        assert cli(["check", "does-not-exist.cac"]) == 3
        assert capsys.readouterr().err.startswith("error:")

    def test_parse_error(self, tmp_path, capsys):
        path = tmp_path / "bad.cac"
        path.write_text("symb nat\n")
        assert cli(["check", str(path)]) == 3
        assert "error:" in capsys.readouterr().err

    def test_resolve_path(self, tmp_path):
        path = tmp_path / "arith.cac"
        path.write_text("symb nat : *\n")
        assert resolve_path(str(path)) == str(path)
        assert resolve_path("arith.cac").endswith(os.path.join("corpus", "arith.cac"))


class TestNormalize:
    def test_normal_form(self, capsys):
        assert cli(["normalize", "arith.cac", "-e", "plus (s (s 0)) (s (s 0))"]) == 0
        assert capsys.readouterr().out.strip() == "s (s (s (s 0)))"

    def test_trace(self, capsys):
        assert cli(["normalize", "arith.cac", "-e", "plus (s (s 0)) (s (s 0))", "--trace"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("plus.2 @ e: ")
        assert lines[-1] == "s (s (s (s 0)))"

    def test_outermost(self, capsys):
        assert cli(["normalize", "arith.cac", "-e", "le (s 0) (plus 0 0)", "--strategy", "outermost"]) == 0
        assert capsys.readouterr().out.strip() == "false"

    def test_out_of_fuel(self, capsys, monkeypatch):
        monkeypatch.setenv("CAC_FUEL", "1")
        assert cli(["normalize", "arith.cac", "-e", "plus (s (s 0)) (s (s 0))"]) == 2
        assert capsys.readouterr().out.strip() == "undecided: no normal form within 1 steps"

    def test_fuel_flag(self, capsys):
        assert cli(["normalize", "arith.cac", "-e", "plus (s 0) (s 0)", "--fuel", "1"]) == 2


class TestTypecheck:
    def test_infer(self, capsys):
        assert cli(["typecheck", "corpus.cac", "-e", "cons nat 0 (nil nat)"]) == 0
        assert capsys.readouterr().out.strip() == "list nat"

    def test_check(self, capsys):
        assert cli(["typecheck", "corpus.cac", "-e", "cons nat 0 (nil nat)", "-t", "list nat"]) == 0
        assert capsys.readouterr().out.strip() == "holds"

    def test_check_fails(self, capsys):
        assert cli(["typecheck", "corpus.cac", "-e", "cons nat 0 (nil nat)", "-t", "nat"]) == 1
        assert capsys.readouterr().out.startswith("fails:")

    def test_ill_typed(self, capsys):
        assert cli(["typecheck", "arith.cac", "-e", "s true"]) == 1
        assert capsys.readouterr().out.startswith("fails:")

    def test_environment(self, capsys):
        assert cli(["typecheck", "arith.cac", "-g", "n : nat", "-e", "plus n 0"]) == 0
        assert capsys.readouterr().out.strip() == "nat"


class TestWitness:
    def test_quiet(self, capsys):
        assert cli(["witness", "arith.cac", "-n", "5", "-q"]) == 0
        assert capsys.readouterr().out.startswith("5 terms checked, 0 failed")


class TestPartitionOption:
    def test_groups(self):
        assert parse_partition("f1=a,b,fw=c") == {"f1": ["a", "b"], "fw": ["c"]}
        assert parse_partition("fw=c") == {"fw": ["c"]}

    def test_unknown_group(self):
        with pytest.raises(ValueError):
            parse_partition("f2=a")

    def test_missing_group(self):
        with pytest.raises(ValueError):
            parse_partition("a,b")
