import functools

import pytest

from cacheck.conditions import full_report
from cacheck.main import load
from cacheck.syntax import load_system
from cacheck.utils import load_config


@functools.lru_cache(maxsize=None)
def _load(name):
    return load(name)


@functools.lru_cache(maxsize=None)
def _report(name):
    return full_report(_load(name), load_config(environ={}))


@pytest.fixture
def system():
    """Bundled example system by file name."""
    return _load


@pytest.fixture
def report():
    """Condition report of a bundled example with the default configuration."""
    return _report


@pytest.fixture
def corpus():
    return _load("corpus.cac")


@pytest.fixture
def arith():
    return _load("arith.cac")


@pytest.fixture
def from_text():
    return load_system
