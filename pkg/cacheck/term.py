from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import InvalidPosition

Position = Tuple[int, ...]
ROOT: Position = ()


class Term:
    @cached_property
    def fv(self) -> FrozenSet["Var"]:
        return frozenset()

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True, repr=False)
class Sort(Term):
    tag: str

    def __repr__(self):
        return f"Sort({self.tag})"


STAR = Sort("*")
BOX = Sort("BOX")


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str
    sort: Sort = STAR

    @cached_property
    def fv(self):
        return frozenset((self,))

    def __repr__(self):
        return f"Var({self.name}{'' if self.sort == STAR else ':BOX'})"


@dataclass(frozen=True, repr=False)
class Symb(Term):
    name: str

    def __repr__(self):
        return f"Symb({self.name})"


@dataclass(frozen=True, repr=False)
class App(Term):
    fun: Term
    arg: Term

    @cached_property
    def fv(self):
        return self.fun.fv | self.arg.fv

    def __repr__(self):
        return f"App({self.fun!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class Abs(Term):
    var: Var
    type: Term
    body: Term

    @cached_property
    def fv(self):
        return self.type.fv | (self.body.fv - {self.var})

    def __repr__(self):
        return f"Abs({self.var!r}, {self.type!r}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Prod(Term):
    var: Var
    type: Term
    body: Term

    @cached_property
    def fv(self):
        return self.type.fv | (self.body.fv - {self.var})

    def __repr__(self):
        return f"Prod({self.var!r}, {self.type!r}, {self.body!r})"


Binder = (Abs, Prod)
Substitution = Dict[Var, Term]


def arrow(dom: Term, cod: Term) -> Prod:
    return Prod(Var("_", BOX if is_kind(dom) else STAR), dom, cod)


def spine(t: Term) -> Tuple[Term, List[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def mk_app(head: Term, args: Iterable[Term]) -> Term:
    for a in args:
        head = App(head, a)
    return head


def unfold_product(t: Term) -> Tuple[List[Tuple[Var, Term]], Term]:
    binders = []
    while isinstance(t, Prod):
        binders.append((t.var, t.type))
        t = t.body
    return binders, t


def is_kind(t: Term) -> bool:
    """(x1:T1)...(xn:Tn)* for n >= 0."""
    _, cod = unfold_product(t)
    return cod == STAR


def head_symbol(t: Term) -> Optional[str]:
    head, _ = spine(t)
    return head.name if isinstance(head, Symb) else None


def free_vars(t: Term, sort: Optional[Sort] = None) -> Set[Var]:
    if sort is None:
        return set(t.fv)
    return {x for x in t.fv if x.sort == sort}


def fresh_var(x: Var, avoid: Iterable[str]) -> Var:
    avoid = set(avoid)
    name = x.name if x.name != "_" else "x"
    while name in avoid:
        name += "'"
    return Var(name, x.sort)


def alpha_eq(t: Term, u: Term) -> bool:
    return _alpha(t, u, {}, {}, 0)


def _alpha(t, u, bt, bu, depth):
    if t is u and not bt and not bu:
        return True
    match t, u:
        case Var(), Var():
            it, iu = bt.get(t), bu.get(u)
            if it is None and iu is None:
                return t == u
            return it == iu
        case Sort(), Sort():
            return t.tag == u.tag
        case Symb(), Symb():
            return t.name == u.name
        case App(), App():
            return _alpha(t.fun, u.fun, bt, bu, depth) and _alpha(t.arg, u.arg, bt, bu, depth)
        case (Abs(), Abs()) | (Prod(), Prod()):
            if t.var.sort != u.var.sort or not _alpha(t.type, u.type, bt, bu, depth):
                return False
            return _alpha(t.body, u.body, {**bt, t.var: depth}, {**bu, u.var: depth}, depth + 1)
    return False


def substitute(t: Term, theta: Mapping[Var, Term]) -> Term:
    theta = {x: v for x, v in theta.items() if x in t.fv and v != x}
    if not theta:
        return t
    match t:
        case Var():
            return theta.get(t, t)
        case App(f, a):
            return App(substitute(f, theta), substitute(a, theta))
        case Abs(x, T, body) | Prod(x, T, body):
            T = substitute(T, theta)
            inner = {y: v for y, v in theta.items() if y != x and y in body.fv}
            if not inner:
                return type(t)(x, T, body)
            captured = set().union(*(v.fv for v in inner.values()))
            if x in captured:
                avoid = {y.name for y in captured | body.fv} | {y.name for y in inner}
                x2 = fresh_var(x, avoid)
                inner[x] = x2
                x = x2
            return type(t)(x, T, substitute(body, inner))
    return t


def compose(theta: Mapping[Var, Term], sigma: Mapping[Var, Term]) -> Substitution:
    """t(theta o sigma) = (t theta) sigma."""
    out = {x: substitute(v, sigma) for x, v in theta.items()}
    for x, v in sigma.items():
        out.setdefault(x, v)
    return out


def children(t: Term) -> List[Tuple[int, Term]]:
    match t:
        case App(f, a):
            return [(1, f), (2, a)]
        case Abs(_, T, body) | Prod(_, T, body):
            return [(1, T), (2, body)]
    return []


def positions(t: Term) -> Iterator[Position]:
    yield ROOT
    for i, c in children(t):
        for p in positions(c):
            yield (i,) + p


def subterm_at(t: Term, p: Sequence[int]) -> Term:
    for k, i in enumerate(p):
        sub = dict(children(t)).get(i)
        if sub is None:
            raise InvalidPosition(f"position {pos_str(p)} is not in {t} (stopped at step {k})")
        t = sub
    return t


def replace_at(t: Term, p: Sequence[int], u: Term) -> Term:
    if not p:
        return u
    i, rest = p[0], p[1:]
    match t, i:
        case App(f, a), 1:
            return App(replace_at(f, rest, u), a)
        case App(f, a), 2:
            return App(f, replace_at(a, rest, u))
        case (Abs(x, T, body) | Prod(x, T, body)), 1:
            return type(t)(x, replace_at(T, rest, u), body)
        case (Abs(x, T, body) | Prod(x, T, body)), 2:
            return type(t)(x, T, replace_at(body, rest, u))
    raise InvalidPosition(f"position {pos_str(p)} is not in {t}")


def pos_str(p: Sequence[int]) -> str:
    return "".join(map(str, p)) or "e"


def arg_position(n: int, i: int) -> Position:
    """Position of the i-th (1-based) spine argument of a head applied to n arguments."""
    return (1,) * (n - i) + (2,)


MonLookup = Optional[Mapping[str, Iterable[int]]]


def signed_positions(t: Term, sign: int = 1, mon: MonLookup = None) -> Set[Position]:
    mon = mon or {}
    head, args = spine(t)
    if isinstance(head, Symb):
        n = len(args)
        out = {(1,) * n} if sign > 0 else set()
        for i in mon.get(head.name, ()):
            if 1 <= i <= n:
                prefix = arg_position(n, i)
                out |= {prefix + p for p in signed_positions(args[i - 1], sign, mon)}
        return out
    match t:
        case Prod(_, U, V):
            return ({(1,) + p for p in signed_positions(U, -sign, mon)}
                    | {(2,) + p for p in signed_positions(V, sign, mon)})
        case Abs(_, _, v):
            return {(2,) + p for p in signed_positions(v, sign, mon)}
        case App(f, _):
            return {(1,) + p for p in signed_positions(f, sign, mon)}
    return {ROOT} if sign > 0 else set()


def is_algebraic(t: Term) -> bool:
    head, args = spine(t)
    if isinstance(head, Var):
        return not args
    return isinstance(head, Symb) and all(is_algebraic(a) for a in args)


def symbols(t: Term) -> Set[str]:
    match t:
        case Symb(name):
            return {name}
        case App(f, a):
            return symbols(f) | symbols(a)
        case Abs(_, T, body) | Prod(_, T, body):
            return symbols(T) | symbols(body)
    return set()


def symbol_positions(t: Term, names: Iterable[str]) -> Set[Position]:
    names = set(names)
    return {p for p in positions(t) if isinstance(s := subterm_at(t, p), Symb) and s.name in names}


def var_positions(t: Term, x: Var) -> Set[Position]:
    """Free occurrences of x."""
    match t:
        case Var():
            return {ROOT} if t == x else set()
        case App(f, a):
            return {(1,) + p for p in var_positions(f, x)} | {(2,) + p for p in var_positions(a, x)}
        case Abs(y, T, body) | Prod(y, T, body):
            out = {(1,) + p for p in var_positions(T, x)}
            if y != x:
                out |= {(2,) + p for p in var_positions(body, x)}
            return out
    return set()


def count_var(t: Term, x: Var) -> int:
    return len(var_positions(t, x))


def contains_box(t: Term) -> bool:
    return any(subterm_at(t, p) == BOX for p in positions(t))


def unify(equations: Iterable[Tuple[Term, Term]],
          decompose: Optional[Callable[[str], bool]] = None) -> Optional[Substitution]:
    """First-order syntactic unification treating every variable as an unknown.

    Returns an idempotent most general unifier or None. When `decompose` is given,
    applications are only split below heads it accepts.
    """
    theta: Substitution = {}
    todo = list(equations)
    while todo:
        a, b = todo.pop()
        a, b = substitute(a, theta), substitute(b, theta)
        if alpha_eq(a, b):
            continue
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            if a in b.fv:
                return None
            theta = {x: substitute(v, {a: b}) for x, v in theta.items()}
            theta[a] = b
            continue
        if isinstance(a, App) and isinstance(b, App):
            ha, args_a = spine(a)
            hb, args_b = spine(b)
            if len(args_a) != len(args_b):
                return None
            if decompose is not None and isinstance(ha, Symb) and not decompose(ha.name):
                return None
            todo.append((ha, hb))
            todo.extend(zip(args_a, args_b))
            continue
        return None
    return theta


def pretty(t: Term) -> str:
    return _pp(t, "top")


def _pp(t: Term, ctx: str) -> str:
    match t:
        case Sort(tag):
            return tag
        case Var(name) | Symb(name):
            return name
        case App(f, a):
            s = f"{_pp(f, 'fun')} {_pp(a, 'arg')}"
            return f"({s})" if ctx == "arg" else s
        case Abs(x, T, body):
            s = f"[{x.name} : {_pp(T, 'top')}] {_pp(body, 'top')}"
        case Prod(x, T, body) if x not in body.fv:
            s = f"{_pp(T, 'dom')} -> {_pp(body, 'top')}"
        case Prod(x, T, body):
            s = f"({x.name} : {_pp(T, 'top')}) {_pp(body, 'top')}"
        case _:
            return repr(t)
    return f"({s})" if ctx != "top" else s
