import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from .errors import OutOfFuel
from .term import (ROOT, Abs, App, Position, Prod, Substitution, Symb, Term, Var, alpha_eq, arg_position, children,
                   fresh_var, head_symbol, mk_app, pos_str, replace_at, spine, subterm_at, substitute, unify)
from .utils import DEFAULT_FUEL, Verdict

logger = logging.getLogger(__name__)

BETA = "beta"


class RewriteSystem:
    """Ordered rules indexed by head symbol. Rules only need `name`, `lhs` and `rhs`."""

    def __init__(self, rules=()):
        self.rules = list(rules)
        self.index: Dict[str, list] = defaultdict(list)
        for rule in self.rules:
            self.index[head_symbol(rule.lhs)].append(rule)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __repr__(self):
        return f"RewriteSystem({[r.name for r in self.rules]})"

    @property
    def heads(self):
        return {h for h, rules in self.index.items() if rules}

    def restrict(self, heads: Iterable[str]) -> "RewriteSystem":
        heads = set(heads)
        return RewriteSystem(r for r in self.rules if head_symbol(r.lhs) in heads)

    def root_reducts(self, t: Term, beta: bool = True) -> List[Tuple[Term, str]]:
        out = []
        if beta and isinstance(t, App) and isinstance(t.fun, Abs):
            out.append((substitute(t.fun.body, {t.fun.var: t.arg}), BETA))
        head, args = spine(t)
        if isinstance(head, Symb):
            for rule in self.index.get(head.name, ()):
                sigma = match_algebraic(rule.lhs, t)
                if sigma is not None:
                    out.append((substitute(rule.rhs, sigma), rule.name))
        return out

    def root_step(self, t: Term, beta: bool = True) -> Optional[Tuple[Term, str]]:
        if beta and isinstance(t, App) and isinstance(t.fun, Abs):
            return substitute(t.fun.body, {t.fun.var: t.arg}), BETA
        head, _ = spine(t)
        if isinstance(head, Symb):
            for rule in self.index.get(head.name, ()):
                sigma = match_algebraic(rule.lhs, t)
                if sigma is not None:
                    return substitute(rule.rhs, sigma), rule.name
        return None


EMPTY = RewriteSystem()


def match_algebraic(l: Term, t: Term, sigma: Optional[Substitution] = None) -> Optional[Substitution]:
    sigma = {} if sigma is None else dict(sigma)
    return sigma if _match(l, t, sigma) else None


def _match(l, t, sigma):
    match l:
        case Var():
            if l in sigma:
                return alpha_eq(sigma[l], t)
            sigma[l] = t
            return True
        case Symb(name):
            return isinstance(t, Symb) and t.name == name
        case App(f, a):
            return isinstance(t, App) and _match(f, t.fun, sigma) and _match(a, t.arg, sigma)
    return False


class Step(NamedTuple):
    tag: str
    position: Position
    redex: Term
    contractum: Term

    def __str__(self):
        return f"{self.tag} @ {pos_str(self.position)}: {self.redex} ~> {self.contractum}"


class _Budget:
    def __init__(self, fuel, trace=None):
        self.fuel = fuel
        self.steps = 0
        self.trace = trace

    def tick(self, tag, pos, redex, contractum):
        if self.steps >= self.fuel:
            raise OutOfFuel(self.fuel, redex)
        self.steps += 1
        if self.trace is not None:
            self.trace.append(Step(tag, pos, redex, contractum))


def one_step_reducts(R: Optional[RewriteSystem], t: Term, beta: bool = True) -> List[Tuple[Term, str, Position]]:
    R = R or EMPTY
    out = []

    def visit(s, p):
        for i, c in children(s):
            visit(c, p + (i,))
        for r, tag in R.root_reducts(s, beta):
            out.append((replace_at(t, p, r), tag, p))

    visit(t, ROOT)
    return out


def normalize(R: Optional[RewriteSystem], t: Term, fuel: int = DEFAULT_FUEL, strategy: str = "innermost",
              beta: bool = True, trace: Optional[List[Step]] = None) -> Term:
    """Normal form of t for beta (unless disabled) and R; raises OutOfFuel past `fuel` contractions."""
    R = R or EMPTY
    budget = _Budget(fuel, trace)
    if strategy == "innermost":
        return _innermost(R, t, beta, budget, ROOT)
    if strategy == "outermost":
        while True:
            found = _outermost_step(R, t, beta, ROOT)
            if found is None:
                return t
            t, (tag, pos, redex, contractum) = found
            budget.tick(tag, pos, redex, contractum)
    raise ValueError(f"unknown strategy {strategy!r}")


def _innermost(R, t, beta, budget, pos):
    while True:
        match t:
            case App(f, a):
                t = App(_innermost(R, f, beta, budget, pos + (1,)), _innermost(R, a, beta, budget, pos + (2,)))
            case Abs(x, T, body) | Prod(x, T, body):
                t = type(t)(x, _innermost(R, T, beta, budget, pos + (1,)), _innermost(R, body, beta, budget, pos + (2,)))
        step = R.root_step(t, beta)
        if step is None:
            return t
        u, tag = step
        budget.tick(tag, pos, t, u)
        t = u


def _outermost_step(R, t, beta, pos):
    step = R.root_step(t, beta)
    if step is not None:
        return step[0], (step[1], pos, t, step[0])
    for i, c in children(t):
        found = _outermost_step(R, c, beta, pos + (i,))
        if found is not None:
            return replace_at(t, (i,), found[0]), found[1]
    return None


def weak_head_normalize(R: Optional[RewriteSystem], t: Term, fuel: int = DEFAULT_FUEL, beta_only: bool = False) -> Term:
    R = EMPTY if beta_only or R is None else R
    budget = _Budget(fuel)
    binders = []
    while isinstance(t, Abs):
        binders.append(t)
        t = t.body
    while True:
        head, args = spine(t)
        if isinstance(head, Abs) and args:
            u = mk_app(substitute(head.body, {head.var: args[0]}), args[1:])
            budget.tick(BETA, ROOT, t, u)
            t = u
            continue
        if isinstance(head, Symb) and head.name in R.index:
            fired = None
            for k in range(len(args) + 1):
                fired = R.root_step(mk_app(head, args[:k]), beta=False)
                if fired is not None:
                    u = mk_app(fired[0], args[k:])
                    budget.tick(fired[1], ROOT, t, u)
                    t = u
                    break
            if fired is not None:
                continue
        break
    for b in reversed(binders):
        t = Abs(b.var, b.type, t)
    return t


def conv(R: Optional[RewriteSystem], t: Term, u: Term, fuel: int = DEFAULT_FUEL) -> bool:
    """Convertibility via normal forms; raises OutOfFuel."""
    if alpha_eq(t, u):
        return True
    return alpha_eq(normalize(R, t, fuel), normalize(R, u, fuel))


def convertible(R: Optional[RewriteSystem], t: Term, u: Term, fuel: int = DEFAULT_FUEL) -> Verdict:
    try:
        if conv(R, t, u, fuel):
            return Verdict.holds()
        return Verdict.fails(f"{t} and {u} have distinct normal forms")
    except OutOfFuel as e:
        return Verdict.undecided(f"normalization ran out of fuel ({e.fuel} steps)")


def joinable(R: Optional[RewriteSystem], t: Term, u: Term, fuel: int = DEFAULT_FUEL) -> Verdict:
    try:
        nt, nu = normalize(R, t, fuel, beta=False), normalize(R, u, fuel, beta=False)
    except OutOfFuel as e:
        return Verdict.undecided(f"normalization ran out of fuel ({e.fuel} steps)")
    if alpha_eq(nt, nu):
        return Verdict.holds(f"both reduce to {nt}")
    return Verdict.fails(f"normal forms {nt} and {nu} differ")


@dataclass(frozen=True)
class CriticalPair:
    peak: Term
    left: Term
    right: Term
    rules: Tuple[str, str]
    position: Position

    def __str__(self):
        return f"{self.rules[0]}/{self.rules[1]} at {pos_str(self.position)}: {self.left} <~ {self.peak} ~> {self.right}"


def _arg_positions(t):
    yield ROOT
    _, args = spine(t)
    n = len(args)
    for i, a in enumerate(args, 1):
        for q in _arg_positions(a):
            yield arg_position(n, i) + q


def _rename_apart(rule, avoid):
    names = {x.name for x in avoid}
    theta = {}
    for x in sorted(rule.lhs.fv, key=lambda v: v.name):
        y = fresh_var(x, names | {x.name})
        names.add(y.name)
        theta[x] = y
    return substitute(rule.lhs, theta), substitute(rule.rhs, theta)


def _pad(lhs, rhs, n, avoid):
    """Apply both sides of a rule to fresh variables until the lhs has `n` arguments."""
    names = {x.name for x in avoid}
    extra = []
    for _ in range(n - len(spine(lhs)[1])):
        z = fresh_var(Var("z"), names)
        names.add(z.name)
        extra.append(z)
    return mk_app(lhs, extra), mk_app(rhs, extra)


def critical_pairs(R: RewriteSystem, among: Optional[Iterable[str]] = None) -> List[CriticalPair]:
    """Overlaps of every lhs into every non-variable argument position of every lhs.

    A lhs with fewer arguments than the subterm it meets is applied to fresh
    variables first: `f x --> r` also rewrites `f x y` to `r y`.
    With `among`, only overlaps involving at least one of the named rules are kept.
    """
    among = None if among is None else set(among)
    out = []
    for outer in R:
        for inner in R:
            if among is not None and outer.name not in among and inner.name not in among:
                continue
            l0, r0 = _rename_apart(inner, outer.lhs.fv)
            for p in _arg_positions(outer.lhs):
                if not p and inner is outer:
                    continue
                sub = subterm_at(outer.lhs, p)
                if isinstance(sub, Var):
                    continue
                n = len(spine(sub)[1])
                if len(spine(l0)[1]) > n:
                    continue
                l1, r1 = _pad(l0, r0, n, outer.lhs.fv | l0.fv)
                sigma = unify([(sub, l1)])
                if sigma is None:
                    continue
                peak = substitute(outer.lhs, sigma)
                left = replace_at(peak, p, substitute(r1, sigma))
                right = substitute(outer.rhs, sigma)
                out.append(CriticalPair(peak, left, right, (inner.name, outer.name), p))
    logger.debug("%d critical pairs", len(out))
    return out
