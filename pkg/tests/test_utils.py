"""Tests for configuration and verdicts."""

import pytest

from cacheck.utils import DEFAULT_FUEL, Config, Outcome, Verdict, load_config, run_parallel


class TestConfig:
    def test_defaults(self):
        config = load_config(environ={})
        assert config.fuel == DEFAULT_FUEL
        assert config.assume == frozenset()
        assert not config.strict

    def test_environment(self):
        assert load_config(environ={"CAC_FUEL": "50"}).fuel == 50

    def test_overrides_win(self):
        config = load_config({"fuel": 7, "strict": None}, environ={"CAC_FUEL": "50"})
        assert config.fuel == 7
        assert config.strict is False

    def test_extra_config(self):
        assert load_config({"colour": "never"}, environ={}).extra_config == {"colour": "never"}

    def test_invalid(self):
        with pytest.raises(ValueError):
            Config(fuel=0)
        with pytest.raises(ValueError):
            Config(assume=["everything"])


class TestVerdict:
    def test_combine_keeps_worst(self):
        v = Verdict.combine([Verdict.holds(), Verdict.assumed("a"), Verdict.undecided("u")])
        assert v.outcome is Outcome.UNDECIDED
        assert v.reason == "u"

    def test_combine_empty(self):
        assert Verdict.combine([]).held

    def test_ok(self):
        assert Verdict.assumed("a").ok
        assert not Verdict.assumed("a").held
        assert not Verdict.undecided("u").ok

    def test_str(self):
        assert str(Verdict.holds()) == "holds"
        assert str(Verdict.fails("no")) == "fails: no"


def test_run_parallel_keeps_order():
    assert run_parallel(lambda x: x * x, range(10), max_workers=3) == [x * x for x in range(10)]
