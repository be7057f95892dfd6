import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .errors import OutOfFuel, TypingError
from .reduction import RewriteSystem
from .rules import Rule, accessible_closure, accessible_plus, well_formed_check
from .signature import Signature, Status, strictly_positive_positions
from .term import Prod, Symb, Term, Var, alpha_eq, mk_app, spine, substitute, symbols
from .typecheck import EMPTY_ENV, Environment, TypeChecker, instantiate
from .utils import DEFAULT_FUEL, Verdict

logger = logging.getLogger(__name__)

Relation = Callable[[object, object], bool]


def _cancel(xs, ys, eq):
    xs, rest = list(xs), []
    for y in ys:
        for i, x in enumerate(xs):
            if eq(x, y):
                del xs[i]
                break
        else:
            rest.append(y)
    return xs, rest


def multiset_eq(xs, ys, eq: Relation = alpha_eq) -> bool:
    xs, ys = _cancel(xs, ys, eq)
    return not xs and not ys


def multiset_gt(xs, ys, gt: Relation, eq: Relation = alpha_eq) -> bool:
    xs, ys = _cancel(xs, ys, eq)
    return bool(xs) and all(any(gt(x, y) for x in xs) for y in ys)


def status_compare(stat: Status, gt: Union[Relation, Sequence[Relation]], us: Sequence, vs: Sequence,
                   eq: Relation = alpha_eq) -> bool:
    """us >_stat vs: lexicographic over the mul groups, multiset inside each group."""
    if len(us) < stat.arity or len(vs) < stat.arity:
        raise ValueError(f"status {stat} needs {stat.arity} arguments, got {len(us)} and {len(vs)}")
    for i, (mu, mv) in enumerate(zip(stat.select(us), stat.select(vs))):
        rel = gt if callable(gt) else gt[i]
        if multiset_eq(mu, mv, eq):
            continue
        return multiset_gt(mu, mv, rel, eq)
    return False


def rpo_gt(sig: Signature, s: Term, t: Term) -> bool:
    """Recursive path ordering on first-order terms with the signature's precedence and statuses."""
    if isinstance(t, Var):
        return t in s.fv and s != t
    f, ss = spine(s)
    g, ts = spine(t)
    if not isinstance(f, Symb) or not isinstance(g, Symb):
        return False
    if any(alpha_eq(si, t) or rpo_gt(sig, si, t) for si in ss):
        return True
    prec = sig.precedence
    if prec.gt(f.name, g.name):
        return all(rpo_gt(sig, s, tj) for tj in ts)
    if prec.eq(f.name, g.name):
        stat = sig.status_of(f.name) if f.name in sig else None
        if stat is None or stat.arity > min(len(ss), len(ts)):
            return False
        return all(rpo_gt(sig, s, tj) for tj in ts) and status_compare(stat, lambda a, b: rpo_gt(sig, a, b), ss, ts)
    return False


@dataclass(frozen=True)
class CallObligation:
    caller: str
    callee: str
    args: Tuple[Term, ...]
    arg_types: Tuple[Term, ...]
    lhs_args: Tuple[Term, ...]
    lhs_types: Tuple[Term, ...]

    def __str__(self):
        return f"{mk_app(Symb(self.callee), self.args)} < {mk_app(Symb(self.caller), self.lhs_args)}"


def sp_gt(sig: Signature, rule: Rule, p: Tuple[Term, Term], q: Tuple[Term, Term]) -> bool:
    """t:T >^i u:U, descent through a strictly positive predicate."""
    (t, T), (u, U) = p, q
    head, targs = spine(t)
    if not isinstance(head, Symb) or head.name not in sig or len(targs) != sig[head.name].arity:
        return False
    out = sig.output(head.name)
    if out is None:
        return False
    C = out[0]
    cls = sig.pred_class(C)
    _, cod = instantiate(sig, head.name, targs)
    v = [rule.apply_rho(a) for a in spine(cod)[1]]
    if any(symbols(a) & cls for a in v):
        return False
    x, uargs = spine(u)
    if not isinstance(x, Var) or x not in rule.env:
        return False
    xT = rule.env.lookup(x)
    for w, V in accessible_closure(sig, rule, t, T):
        if w != x or not alpha_eq(rule.apply_rho(V), xT):
            continue
        cur, dom_types = xT, []
        for a in uargs:
            if not isinstance(cur, Prod):
                break
            dom_types.append(cur.type)
            cur = substitute(cur.body, {cur.var: a})
        if len(dom_types) != len(uargs) or isinstance(cur, Prod):
            continue
        h2, w_delta = spine(cur)
        if h2 != Symb(C) or not alpha_eq(rule.apply_rho(U), cur):
            continue
        if any(symbols(D) & cls for D in dom_types):
            continue
        vs, ws = sig.predicate_args(C, v), sig.predicate_args(C, w_delta)
        if len(vs) == len(ws) and all(alpha_eq(a, b) for a, b in zip(vs, ws)):
            return True
    return False


def arg_gt(sig: Signature, rule: Rule, obligation: CallObligation) -> bool:
    stat = sig.status_of(rule.head)
    if stat is None:
        return False
    if stat.arity > len(obligation.lhs_args) or stat.arity > len(obligation.args):
        logger.info("rule %s: status %s needs %d arguments", rule.name, stat, stat.arity)
        return False
    sp = strictly_positive_positions(sig, rule.head)

    def eq(p, q):
        return alpha_eq(rule.apply_rho(p[0]), rule.apply_rho(q[0])) and alpha_eq(rule.apply_rho(p[1]), rule.apply_rho(q[1]))

    def acc_gt(p, q):
        return accessible_plus(sig, rule, p[0], p[1], q[0], q[1])

    def sp_rel(p, q):
        return sp_gt(sig, rule, p, q)

    rels = [sp_rel if i in sp else acc_gt for i in range(1, len(stat.slots) + 1)]
    lhs = list(zip(obligation.lhs_args, obligation.lhs_types))
    call = list(zip(obligation.args, obligation.arg_types))
    return status_compare(stat, rels, lhs, call, eq)


class ClosureChecker(TypeChecker):
    """Typing restricted to the computability closure of a rule's left-hand side."""

    def __init__(self, signature: Signature, rule: Rule, rules: Optional[RewriteSystem] = None,
                 fuel: int = DEFAULT_FUEL):
        super().__init__(signature, rules, fuel)
        self.rule = rule
        self.head = rule.head
        self.prec = signature.precedence
        self.lhs_types = tuple(rule.arg_types(signature))
        self.obligations: List[CallObligation] = []

    def taken_names(self, env):
        return env.names | self.rule.env.names | {x.name for x in self.rule.lhs.fv}

    def var_type(self, env, x):
        T = env.lookup(x)
        if T is None:
            T = self.rule.env.lookup(x)
        if T is None:
            raise TypingError(f"variable {x.name} is not in the computability closure")
        return T

    def symbol_type(self, name):
        if self.prec.eq(self.head, name):
            raise TypingError(f"partial call {name}: symbols equivalent to {self.head} "
                              "must be applied to all their arguments")
        if not self.prec.gt(self.head, name):
            raise TypingError(f"{name} is not smaller than {self.head} in the precedence")
        T = super().symbol_type(name)
        if symbols(T) & self.prec.equivalence_class(self.head):
            raise TypingError(f"type of {name} mentions {self.head}")
        return T

    def infer(self, env, t):
        head, args = spine(t)
        if args and isinstance(head, Symb) and head.name in self.signature and self.prec.eq(self.head, head.name):
            return self.infer_call(env, head.name, args)
        return super().infer(env, t)

    def infer_call(self, env, g, args):
        T = TypeChecker.symbol_type(self, g)
        n = self.signature[g].arity
        if len(args) < n:
            raise TypingError(f"call {mk_app(Symb(g), args)} is partial: {g} takes {n} arguments")
        arg_types = []
        for a in args[:n]:
            self.check(env, a, T.type)
            arg_types.append(T.type)
            T = substitute(T.body, {T.var: a})
        obligation = CallObligation(self.head, g, tuple(args[:n]), tuple(arg_types), tuple(self.rule.args),
                                    self.lhs_types)
        if not arg_gt(self.signature, self.rule, obligation):
            raise TypingError(f"call {obligation} does not decrease")
        self.obligations.append(obligation)
        for a in args[n:]:
            P = self.whnf(T)
            if not isinstance(P, Prod):
                P = self.nf(T)
                if not isinstance(P, Prod):
                    raise TypingError(f"{mk_app(Symb(g), args)} applied beyond its type {T}")
            self.check(env, a, P.type)
            T = substitute(P.body, {P.var: a})
        return T


def cc_check(sig: Signature, rule: Rule, env: Optional[Environment], t: Term, T: Term,
             rules: Optional[RewriteSystem] = None, fuel: int = DEFAULT_FUEL) -> Verdict:
    checker = ClosureChecker(sig, rule, rules, fuel)
    try:
        checker.check(env or EMPTY_ENV, t, T)
    except TypingError as e:
        return Verdict.fails(str(e))
    except OutOfFuel as e:
        return Verdict.undecided(f"conversion ran out of fuel ({e.fuel} steps)")
    calls = "; ".join(map(str, checker.obligations))
    return Verdict.holds(f"calls {calls}" if calls else "")


def general_schema_check(sig: Signature, rule: Rule, rules: Optional[RewriteSystem] = None,
                         fuel: int = DEFAULT_FUEL) -> Verdict:
    wf = well_formed_check(sig, rule, rules, fuel)
    if not wf.held:
        return Verdict(outcome=wf.outcome, reason=f"{rule.name} not well-formed: {wf.reason}")
    cc = cc_check(sig, rule, EMPTY_ENV, rule.rhs, rule.apply_rho(rule.output_type(sig)), rules, fuel)
    if not cc.held:
        return Verdict(outcome=cc.outcome, reason=f"{rule.name}: {cc.reason}")
    return cc
