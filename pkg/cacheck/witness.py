import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from tqdm import tqdm

from .errors import OutOfFuel, TypingError
from .reduction import match_algebraic, normalize, one_step_reducts
from .rules import System
from .term import (BOX, STAR, Prod, Symb, Term, alpha_eq, is_algebraic, mk_app, pos_str, positions, spine,
                   substitute, unfold_product)
from .typecheck import EMPTY_ENV, TypeChecker
from .utils import DEFAULT_FUEL

logger = logging.getLogger(__name__)


def size(t: Term) -> int:
    return sum(1 for _ in positions(t))


class WitnessGenerator:
    """Random closed well-typed first-order terms over a signature."""

    def __init__(self, system: System, seed: int = 0, depth: int = 4):
        self.sig = system.signature
        self.rng = random.Random(seed)
        self.depth = depth
        self.predicates = [C for C in self.sig.constant_predicates() if self._first_order(C)]
        self.by_output: Dict[str, List[str]] = {}
        for d in self.sig:
            if d.sort != STAR or not self._first_order(d.name):
                continue
            head, _ = spine(unfold_product(d.type)[1])
            if isinstance(head, Symb):
                self.by_output.setdefault(head.name, []).append(d.name)

    def _first_order(self, f: str) -> bool:
        for x, T in self.sig.binders(f):
            if x.sort == BOX:
                if T != STAR:
                    return False
            elif isinstance(T, Prod) or not is_algebraic(T):
                return False
        return True

    def _fill(self, f: str, sigma, depth: int) -> Optional[List[Term]]:
        args, theta = [], {}
        for x, T in self.sig.binders(f):
            if x in sigma:
                a = sigma[x]
            elif x.sort == BOX:
                a = self.ground_type(depth - 1)
            else:
                a = self.term(substitute(T, theta), depth - 1)
            if a is None:
                return None
            theta[x] = a
            args.append(a)
        return args

    def ground_type(self, depth: Optional[int] = None) -> Optional[Term]:
        depth = self.depth if depth is None else depth
        if depth < -2:
            return None
        candidates = list(self.predicates)
        self.rng.shuffle(candidates)
        candidates.sort(key=lambda C: len(self.sig.binders(C)) if depth <= 0 else 0)
        for C in candidates:
            args = self._fill(C, {}, depth)
            if args is not None:
                return mk_app(Symb(C), args)
        return None

    def term(self, T: Term, depth: Optional[int] = None) -> Optional[Term]:
        depth = self.depth if depth is None else depth
        head, _ = spine(T)
        if depth < -4 or not isinstance(head, Symb):
            return None
        candidates = list(self.by_output.get(head.name, ()))
        self.rng.shuffle(candidates)
        if depth <= 0:
            candidates.sort(key=lambda f: sum(1 for x, _ in self.sig.binders(f) if x.sort == STAR))
        for f in candidates:
            sigma = match_algebraic(unfold_product(self.sig[f].type)[1], T)
            if sigma is None:
                continue
            args = self._fill(f, sigma, depth)
            if args is not None:
                return mk_app(Symb(f), args)
        return None

    def sample(self, max_size: int = 30, attempts: int = 20) -> Optional[Term]:
        for _ in range(attempts):
            T = self.ground_type(1)
            if T is None:
                return None
            t = self.term(T)
            if t is not None and size(t) <= max_size:
                return t
        return None


def check_witness(system: System, t: Term, fuel: int = DEFAULT_FUEL) -> List[str]:
    """Subject reduction on every one-step reduct, then innermost against outermost normal forms."""
    R = system.rewrite_system
    checker = TypeChecker(system.signature, R, fuel)
    problems = []
    try:
        T = checker.infer(EMPTY_ENV, t)
        for u, tag, p in one_step_reducts(R, t):
            U = checker.infer(EMPTY_ENV, u)
            if not checker.conv(T, U):
                problems.append(f"{tag} at {pos_str(p)} turns {t} : {T} into {u} : {U}")
        inner = normalize(R, t, fuel)
        outer = normalize(R, t, fuel, strategy="outermost")
        if not alpha_eq(inner, outer):
            problems.append(f"{t} has innermost normal form {inner} but outermost normal form {outer}")
    except TypingError as e:
        problems.append(f"{t}: {e}")
    except OutOfFuel as e:
        problems.append(f"{t}: no normal form within {e.fuel} steps")
    return problems


@dataclass
class WitnessReport:
    checked: int = 0
    terms: List[Term] = field(default_factory=list)
    failures: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def passed(self):
        return self.checked > 0 and not self.failures

    def render(self) -> str:
        lines = [f"{self.checked} terms checked, {len(self.failures)} failed"]
        for t, problems in self.failures.items():
            lines += [f"  {p}" for p in problems]
        return "\n".join(lines)


def run_witnesses(system: System, count: int = 200, seed: int = 0, max_size: int = 30, fuel: int = DEFAULT_FUEL,
                  progress: bool = True) -> WitnessReport:
    generator = WitnessGenerator(system, seed)
    report = WitnessReport()
    for _ in tqdm(range(count), desc="witnesses", disable=not progress, leave=False):
        t = generator.sample(max_size)
        if t is None:
            logger.warning("no closed first-order term could be generated")
            break
        report.checked += 1
        report.terms.append(t)
        problems = check_witness(system, t, fuel)
        if problems:
            report.failures[str(t)] = problems
    return report
