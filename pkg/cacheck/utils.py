import os
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, TypeVar

from pydantic import BaseModel, ConfigDict

DEFAULT_FUEL = 100_000
ASSUMPTIONS = ("s5", "confluence", "fo-termination")

T = TypeVar("T")
R = TypeVar("R")


class Outcome(str, Enum):
    HOLDS = "holds"
    ASSUMED = "assumed"
    UNDECIDED = "undecided"
    FAILS = "fails"

    @property
    def severity(self):
        return list(Outcome).index(self)


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    outcome: Outcome
    reason: str = ""

    @classmethod
    def holds(cls, reason=""):
        return cls(outcome=Outcome.HOLDS, reason=reason)

    @classmethod
    def fails(cls, reason):
        return cls(outcome=Outcome.FAILS, reason=reason)

    @classmethod
    def assumed(cls, reason):
        return cls(outcome=Outcome.ASSUMED, reason=reason)

    @classmethod
    def undecided(cls, reason):
        return cls(outcome=Outcome.UNDECIDED, reason=reason)

    @property
    def held(self):
        return self.outcome is Outcome.HOLDS

    @property
    def failed(self):
        return self.outcome is Outcome.FAILS

    @property
    def ok(self):
        """Holds, or holds under an explicit assumption."""
        return self.outcome in (Outcome.HOLDS, Outcome.ASSUMED)

    def __bool__(self):
        return self.held

    def __str__(self):
        return f"{self.outcome.value}: {self.reason}" if self.reason else self.outcome.value

    @classmethod
    def combine(cls, verdicts: Iterable["Verdict"], reason: str = "") -> "Verdict":
        verdicts = list(verdicts)
        if not verdicts:
            return cls.holds(reason)
        worst = max(v.outcome.severity for v in verdicts)
        outcome = list(Outcome)[worst]
        if outcome is Outcome.HOLDS:
            return cls.holds(reason)
        reasons = [v.reason for v in verdicts if v.outcome is outcome and v.reason]
        return cls(outcome=outcome, reason="; ".join(([reason] if reason else []) + reasons))


@dataclass
class Config:
    fuel: int = DEFAULT_FUEL
    assume: frozenset = frozenset()
    strict: bool = False
    partition: Optional[Dict[str, List[str]]] = None
    max_workers: int = 4
    extra_config: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.fuel = int(self.fuel)
        if self.fuel <= 0:
            raise ValueError(f"fuel must be positive, got {self.fuel}")
        self.assume = frozenset(self.assume or ())
        unknown = self.assume - set(ASSUMPTIONS)
        if unknown:
            raise ValueError(f"unknown assumption(s) {sorted(unknown)}; expected one of {ASSUMPTIONS}")


def load_config(overrides: Optional[Mapping[str, Any]] = None, environ: Optional[Mapping[str, str]] = None, cls=Config):
    environ = os.environ if environ is None else environ
    config_dict = {}
    if environ.get("CAC_FUEL"):
        config_dict["fuel"] = int(environ["CAC_FUEL"])
    config_dict.update({k: v for k, v in (overrides or {}).items() if v is not None})
    cls_fields = {f.name for f in fields(cls)}
    init_args = {k: v for k, v in config_dict.items() if k in cls_fields}
    extra_args = {}
    for k, v in config_dict.items():
        if k not in cls_fields:
            extra_args[k] = v
    return cls(**init_args, extra_config=extra_args)


def run_parallel(fn: Callable[[T], R], items: Iterable[T], max_workers: int = 4) -> List[R]:
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(fn, item) for item in items]
        return [future.result() for future in futures]


def setup_logging(verbosity=0):
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(verbosity, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
