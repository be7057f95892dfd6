import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

from .errors import InvalidPosition, OutOfFuel, TypingError
from .reduction import RewriteSystem, conv, normalize, weak_head_normalize
from .term import (BOX, Abs, App, Prod, Sort, Symb, Term, Var, contains_box, fresh_var, is_kind, positions,
                   spine, subterm_at, substitute)
from .utils import DEFAULT_FUEL, Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Environment:
    bindings: Tuple[Tuple[Var, Term], ...] = ()

    def extend(self, x: Var, T: Term) -> "Environment":
        if x.name in self.names:
            raise TypingError(f"variable {x.name} declared twice")
        return Environment(self.bindings + ((x, T),))

    def lookup(self, x: Var) -> Optional[Term]:
        for y, T in reversed(self.bindings):
            if y == x:
                return T
        return None

    def __contains__(self, x):
        return any(y == x for y, _ in self.bindings)

    def __iter__(self) -> Iterator[Tuple[Var, Term]]:
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)

    @property
    def domain(self) -> List[Var]:
        return [x for x, _ in self.bindings]

    @property
    def names(self):
        return {x.name for x, _ in self.bindings}

    def __str__(self):
        return ", ".join(f"{x.name} : {T}" for x, T in self.bindings) or "(empty)"


EMPTY_ENV = Environment()


class TermClass(Enum):
    KIND = "kind"
    PREDICATE = "predicate"
    OBJECT = "object"
    TOP_SORT = "top-sort"


class TypeChecker:
    """Syntax-directed typing with conversion through beta and the given rules."""

    def __init__(self, signature, rules: Optional[RewriteSystem] = None, fuel: int = DEFAULT_FUEL):
        self.signature = signature
        self.rules = rules
        self.fuel = fuel

    def whnf(self, t):
        return weak_head_normalize(self.rules, t, self.fuel)

    def nf(self, t):
        return normalize(self.rules, t, self.fuel)

    def conv(self, t, u):
        return conv(self.rules, t, u, self.fuel)

    def symbol_type(self, name: str) -> Term:
        T = self.signature.type_of(name)
        if T is None:
            raise TypingError(f"unknown symbol {name}")
        return T

    def var_type(self, env: Environment, x: Var) -> Term:
        T = env.lookup(x)
        if T is None:
            raise TypingError(f"unbound variable {x.name}")
        return T

    def taken_names(self, env: Environment):
        return env.names

    def open_binder(self, env, t):
        x, body = t.var, t.body
        taken = self.taken_names(env)
        if x.name in taken:
            x2 = fresh_var(x, taken | {y.name for y in body.fv})
            body = substitute(body, {x: x2})
            x = x2
        return x, body

    def sort_of(self, env: Environment, T: Term) -> Sort:
        s = self.whnf(self.infer(env, T))
        if not isinstance(s, Sort):
            raise TypingError(f"{T} is not a type (its type {s} is not a sort)")
        return s

    def check_binder(self, env, x, T):
        s = self.sort_of(env, T)
        if x.sort != s:
            raise TypingError(f"binder {x.name} : {T} has sort {s} but is tagged {x.sort}")

    def infer(self, env: Environment, t: Term) -> Term:
        match t:
            case Sort():
                if t == BOX:
                    raise TypingError("BOX has no type")
                return BOX
            case Var():
                return self.var_type(env, t)
            case Symb(name):
                return self.symbol_type(name)
            case Prod(_, T, _):
                self.check_binder(env, t.var, T)
                x, body = self.open_binder(env, t)
                return self.sort_of(env.extend(x, T), body)
            case Abs(_, T, _):
                self.check_binder(env, t.var, T)
                x, body = self.open_binder(env, t)
                inner = env.extend(x, T)
                V = self.infer(inner, body)
                if V == BOX:
                    raise TypingError(f"abstraction body {body} is a kind")
                self.sort_of(inner, V)
                return Prod(x, T, V)
            case App(f, a):
                return self.infer_app(env, f, a)
        raise TypingError(f"cannot type {t!r}")

    def infer_app(self, env, f, a):
        F = self.infer(env, f)
        P = self.whnf(F)
        if not isinstance(P, Prod):
            P = self.nf(F)
            if not isinstance(P, Prod):
                raise TypingError(f"{f} : {F} is not a function")
        self.check(env, a, P.type)
        return substitute(P.body, {P.var: a})

    def check(self, env: Environment, t: Term, T: Term):
        if T == BOX:
            U = self.infer(env, t)
            if U != BOX:
                raise TypingError(f"{t} : {U} is not a kind")
            return
        U = self.infer(env, t)
        if not self.conv(U, T):
            raise TypingError(f"{t} has type {U}, expected {T}")

    def check_env(self, env: Environment):
        prefix = EMPTY_ENV
        for x, T in env:
            self.check_binder(prefix, x, T)
            prefix = prefix.extend(x, T)


def infer(sig, env: Optional[Environment], t: Term, rules: Optional[RewriteSystem] = None, fuel: int = DEFAULT_FUEL) -> Term:
    return TypeChecker(sig, rules, fuel).infer(env or EMPTY_ENV, t)


def check(sig, env: Optional[Environment], t: Term, T: Term, rules: Optional[RewriteSystem] = None,
          fuel: int = DEFAULT_FUEL) -> Verdict:
    try:
        TypeChecker(sig, rules, fuel).check(env or EMPTY_ENV, t, T)
    except TypingError as e:
        return Verdict.fails(str(e))
    except OutOfFuel as e:
        return Verdict.undecided(f"conversion ran out of fuel ({e.fuel} steps)")
    return Verdict.holds()


def check_env(sig, env: Environment, rules: Optional[RewriteSystem] = None, fuel: int = DEFAULT_FUEL) -> Verdict:
    try:
        TypeChecker(sig, rules, fuel).check_env(env)
    except TypingError as e:
        return Verdict.fails(f"environment {env}: {e}")
    except OutOfFuel as e:
        return Verdict.undecided(f"conversion ran out of fuel ({e.fuel} steps)")
    return Verdict.holds()


def instantiate(sig, f: str, args: Sequence[Term]) -> Tuple[List[Term], Term]:
    """Argument types T_i{x->t} and the remaining type U{x->t} of f applied to args."""
    T = sig.type_of(f)
    if T is None:
        raise TypingError(f"unknown symbol {f}")
    types = []
    for a in args:
        if not isinstance(T, Prod):
            raise TypingError(f"{f} takes at most {len(types)} arguments, got {len(args)}")
        types.append(T.type)
        T = substitute(T.body, {T.var: a})
    return types, T


def canonical_type(sig, t: Term) -> Term:
    head, args = spine(t)
    if not isinstance(head, Symb):
        raise TypingError(f"{t} is not headed by a symbol")
    return instantiate(sig, head.name, args)[1]


def derived_type(sig, t: Term, p: Sequence[int]) -> Term:
    p = tuple(p)
    head, args = spine(t)
    n = len(args)
    k = 0
    while k < len(p) and p[k] == 1:
        k += 1
    if k >= len(p) or p[k] != 2 or k >= n:
        raise InvalidPosition(f"no derived type at position {''.join(map(str, p)) or 'e'} of {t}")
    if not isinstance(head, Symb):
        raise TypingError(f"{t} is not headed by a symbol")
    i = n - k
    types, _ = instantiate(sig, head.name, args)
    rest = p[k + 1:]
    return types[i - 1] if not rest else derived_type(sig, args[i - 1], rest)


def classify(sig, env: Optional[Environment], t: Term, rules: Optional[RewriteSystem] = None,
             fuel: int = DEFAULT_FUEL) -> TermClass:
    if t == BOX:
        return TermClass.TOP_SORT
    checker = TypeChecker(sig, rules, fuel)
    env = env or EMPTY_ENV
    T = checker.infer(env, t)
    if T == BOX:
        return TermClass.KIND
    if checker.infer(env, T) == BOX:
        return TermClass.PREDICATE
    return TermClass.OBJECT


def is_bad_kind(t: Term) -> bool:
    for p in positions(t):
        s = subterm_at(t, p)
        if isinstance(s, Abs) and is_kind(s.body):
            return True
        if isinstance(s, App) and is_kind(s.arg):
            return True
    return False


def rhs_shape_check(sig, r: Term, level: str = "object", lhs: Optional[Term] = None) -> Verdict:
    """At type level r must be a symbol application, or an argument of `lhs` passed through unchanged."""
    problems = []
    if contains_box(r):
        problems.append("contains BOX")
    if is_kind(r):
        problems.append("is a kind")
    if is_bad_kind(r):
        problems.append("has an abstraction or application over a kind")
    if level == "type":
        head, _ = spine(r)
        projection = isinstance(r, Var) and lhs is not None and r in spine(lhs)[1]
        if not (isinstance(head, Symb) or projection):
            problems.append("type-level right-hand side is not a symbol application")
    if problems:
        return Verdict.fails(f"{r} " + ", ".join(problems))
    return Verdict.holds()
