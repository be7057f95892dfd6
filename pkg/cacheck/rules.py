import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import OutOfFuel, TypingError
from .reduction import RewriteSystem
from .signature import Signature
from .term import (ROOT, Sort, Symb, Term, Var, alpha_eq, count_var, is_algebraic, positions, spine, subterm_at,
                   substitute, symbols, unify, var_positions)
from .typecheck import EMPTY_ENV, Environment, TypeChecker, derived_type, instantiate
from .utils import DEFAULT_FUEL, Verdict

logger = logging.getLogger(__name__)

TypedTerm = Tuple[Term, Term]


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: Term
    rhs: Term
    env: Environment = EMPTY_ENV
    rho: Tuple[Tuple[Var, Term], ...] = ()
    assume: FrozenSet[str] = frozenset()
    line: Optional[int] = None

    @property
    def head(self) -> str:
        head, _ = spine(self.lhs)
        return head.name if isinstance(head, Symb) else ""

    @property
    def args(self) -> List[Term]:
        return spine(self.lhs)[1]

    @cached_property
    def rho_map(self) -> Dict[Var, Term]:
        return dict(self.rho)

    def apply_rho(self, t: Term) -> Term:
        return substitute(t, self.rho_map)

    @cached_property
    def left_linear(self) -> bool:
        return all(count_var(self.lhs, x) == 1 for x in self.lhs.fv)

    @cached_property
    def duplicating(self) -> bool:
        return any(count_var(self.rhs, x) > count_var(self.lhs, x) for x in self.rhs.fv)

    def arg_types(self, sig: Signature) -> List[Term]:
        """T_i{x->l} for the lhs arguments."""
        return instantiate(sig, self.head, self.args)[0]

    def output_type(self, sig: Signature) -> Term:
        """U{x->l}, the canonical type of the lhs."""
        return instantiate(sig, self.head, self.args)[1]

    def __str__(self):
        return f"{self.lhs} --> {self.rhs}"


def default_environment(sig: Signature, lhs: Term, rho: Optional[Dict[Var, Term]] = None) -> Environment:
    """lhs variables outside dom(rho) with the derived type of their first occurrence."""
    rho = rho or {}
    env = EMPTY_ENV
    for p in positions(lhs):
        x = subterm_at(lhs, p)
        if isinstance(x, Var) and x not in rho and x not in env and p != ROOT:
            env = env.extend(x, substitute(derived_type(sig, lhs, p), rho))
    return env


def make_rule(sig: Signature, name: str, lhs: Term, rhs: Term, env: Optional[Environment] = None,
              rho: Optional[Dict[Var, Term]] = None, assume: Iterable[str] = (), line: Optional[int] = None) -> Rule:
    rho = dict(rho or {})
    if env is None:
        env = default_environment(sig, lhs, rho)
    return Rule(name, lhs, rhs, env, tuple(rho.items()), frozenset(assume), line)


@dataclass
class System:
    signature: Signature
    rules: List[Rule] = field(default_factory=list)
    source: Optional[str] = None

    @cached_property
    def rewrite_system(self) -> RewriteSystem:
        return RewriteSystem(self.rules)

    def rules_for(self, heads: Iterable[str]) -> List[Rule]:
        heads = set(heads)
        return [r for r in self.rules if r.head in heads]

    def fragment(self, rule: Rule) -> RewriteSystem:
        """Rules already validated when `rule` is checked: those with a strictly smaller head."""
        prec = self.signature.precedence
        return RewriteSystem(r for r in self.rules if prec.gt(rule.head, r.head))

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


def syntactic_check(rule: Rule, sig: Optional[Signature] = None) -> Tuple[Verdict, Dict[str, bool]]:
    problems = []
    head, args = spine(rule.lhs)
    if not isinstance(head, Symb):
        problems.append("left-hand side is not headed by a symbol")
    if not is_algebraic(rule.lhs):
        problems.append("left-hand side is not algebraic")
    extra = rule.rhs.fv - rule.lhs.fv
    if extra:
        problems.append(f"right-hand side variables {', '.join(sorted(x.name for x in extra))} not in the left-hand side")
    for x in rule.rho_map:
        if x not in rule.lhs.fv or x in rule.env:
            problems.append(f"rho binds {x.name}, which must be a left-hand side variable outside the environment")
    if sig is not None and isinstance(head, Symb):
        if head.name not in sig:
            problems.append(f"undeclared symbol {head.name}")
        elif len(args) > sig[head.name].arity:
            problems.append(f"{head.name} applied to {len(args)} arguments, arity is {sig[head.name].arity}")
    flags = {"left_linear": rule.left_linear, "duplicating": rule.duplicating}
    verdict = Verdict.fails("; ".join(problems)) if problems else Verdict.holds()
    return verdict, flags


def accessible_steps(sig: Signature, rule: Rule, t: Term, T: Term) -> List[TypedTerm]:
    """All u:U with t:T |>_rho u:U in one step."""
    head, args = spine(t)
    if not isinstance(head, Symb) or head.name not in sig:
        return []
    out = sig.output(head.name)
    if out is None or len(args) != sig[head.name].arity:
        return []
    C, _ = out
    types, cod = instantiate(sig, head.name, args)
    if not alpha_eq(rule.apply_rho(T), rule.apply_rho(cod)):
        return []
    cls = sig.pred_class(C)
    if any(symbols(rule.apply_rho(a)) & cls for a in args):
        return []
    return [(args[j - 1], types[j - 1]) for j in sorted(sig.acc_of(head.name))]


def accessible(sig: Signature, rule: Rule, t: Term, T: Term, u: Term, U: Term) -> bool:
    return any(alpha_eq(u2, u) and alpha_eq(rule.apply_rho(U2), rule.apply_rho(U))
               for u2, U2 in accessible_steps(sig, rule, t, T))


def accessible_closure(sig: Signature, rule: Rule, t: Term, T: Term) -> List[TypedTerm]:
    """Pairs reachable from t:T in one or more accessibility steps, breadth first."""
    seen: List[TypedTerm] = []
    frontier = [(t, T)]
    while frontier:
        nxt = []
        for s, S in frontier:
            for u, U in accessible_steps(sig, rule, s, S):
                if not any(alpha_eq(u, v) and alpha_eq(U, V) for v, V in seen):
                    seen.append((u, U))
                    nxt.append((u, U))
        frontier = nxt
    return seen


def accessible_plus(sig: Signature, rule: Rule, t: Term, T: Term, u: Term, U: Term) -> bool:
    return any(alpha_eq(rule.apply_rho(v), rule.apply_rho(u)) and alpha_eq(rule.apply_rho(V), rule.apply_rho(U))
               for v, V in accessible_closure(sig, rule, t, T))


def _reached(sig: Signature, rule: Rule, x: Var, xT: Term, lhs_pairs: Sequence[TypedTerm]) -> bool:
    target = rule.apply_rho(xT)
    for l, L in lhs_pairs:
        if l == x and alpha_eq(rule.apply_rho(L), target):
            return True
        if any(v == x and alpha_eq(rule.apply_rho(V), target) for v, V in accessible_closure(sig, rule, l, L)):
            return True
    return False


def well_formed_check(sig: Signature, rule: Rule, rules: Optional[RewriteSystem] = None,
                      fuel: int = DEFAULT_FUEL) -> Verdict:
    checker = TypeChecker(sig, rules, fuel)
    try:
        checker.check_env(rule.env)
        checker.check(rule.env, rule.apply_rho(rule.lhs), rule.apply_rho(rule.output_type(sig)))
    except TypingError as e:
        return Verdict.fails(f"(i) {e}")
    except OutOfFuel as e:
        return Verdict.undecided(f"(i) conversion ran out of fuel ({e.fuel} steps)")
    pairs = list(zip(rule.args, rule.arg_types(sig)))
    unreached = [x.name for x, T in rule.env if not _reached(sig, rule, x, T, pairs)]
    if unreached:
        return Verdict.fails(f"(ii) {', '.join(unreached)} not accessible in the left-hand side")
    outside = [x.name for x in rule.rho_map if x in rule.env or x not in rule.lhs.fv]
    if outside:
        return Verdict.fails(f"(iii) rho binds {', '.join(outside)}")
    return Verdict.holds()


def s4_check(sig: Signature, rule: Rule) -> Verdict:
    missing = []
    for x, T in rule.env:
        candidates = [p for p in var_positions(rule.lhs, x) if p]
        ok = False
        for p in candidates:
            try:
                D = derived_type(sig, rule.lhs, p)
            except TypingError as e:
                return Verdict.fails(f"left-hand side is ill-typed: {e}")
            if alpha_eq(D, T) or alpha_eq(rule.apply_rho(D), T):
                ok = True
                break
        if not ok:
            missing.append(x.name)
    if missing:
        return Verdict.fails(f"no occurrence derives the declared type of {', '.join(missing)}")
    return Verdict.holds()


def s3_check(sig: Signature, rule: Rule, rules: Optional[RewriteSystem] = None, fuel: int = DEFAULT_FUEL) -> Verdict:
    checker = TypeChecker(sig, rules, fuel)
    try:
        checker.check_env(rule.env)
        checker.check(rule.env, rule.rhs, rule.apply_rho(rule.output_type(sig)))
    except TypingError as e:
        return Verdict.fails(str(e))
    except OutOfFuel as e:
        return Verdict.undecided(f"conversion ran out of fuel ({e.fuel} steps)")
    return Verdict.holds()


def _first_order(t: Term) -> bool:
    head, args = spine(t)
    if isinstance(head, Var):
        return not args
    return isinstance(head, (Symb, Sort)) and all(_first_order(a) for a in args)


def inversion_constraints(sig: Signature, rule: Rule) -> List[Tuple[Term, Term]]:
    """Pairs (expected, actual) that typing the lhs forces to be convertible."""
    constraints = []

    def visit(t, expected):
        head, args = spine(t)
        if isinstance(head, Var):
            T = rule.env.lookup(head)
            if expected is not None and T is not None:
                constraints.append((expected, T))
            return
        types, out = instantiate(sig, head.name, args)
        if expected is not None:
            constraints.append((expected, out))
        for a, A in zip(args, types):
            visit(a, A)

    visit(rule.lhs, None)
    return constraints


def _s5_procedure(sig: Signature, rule: Rule) -> Verdict:
    try:
        constraints = [(a, b) for a, b in inversion_constraints(sig, rule) if not alpha_eq(a, b)]
    except TypingError as e:
        return Verdict.fails(f"left-hand side is ill-typed: {e}")
    for a, b in constraints:
        if not (_first_order(a) and _first_order(b)):
            return Verdict.undecided(f"non-algebraic constraint {a} = {b}")
    theta = unify(constraints, decompose=lambda f: not sig.is_defined(f))
    if theta is None:
        return Verdict.undecided("inversion constraints have no syntactic solution")
    for x, v in rule.rho:
        if not alpha_eq(substitute(x, theta), substitute(v, theta)):
            return Verdict.undecided(f"{x.name} := {v} is not entailed by the typing constraints")
    return Verdict.holds("rho entailed by the most general solution of the typing constraints")


def s5_check(sig: Signature, rule: Rule, assume: bool = False) -> Verdict:
    if not rule.rho:
        return Verdict.holds("rho is the identity")
    verdict = _s5_procedure(sig, rule)
    if verdict.held or verdict.failed:
        return verdict
    if assume or "s5" in rule.assume:
        return Verdict.assumed(f"user asserted S5 ({verdict.reason})")
    return verdict
