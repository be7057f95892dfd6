import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import lark
from lark import Lark, Transformer, v_args

from .errors import InvalidPosition, ParseError, SignatureError, TypingError
from .rules import System, make_rule
from .signature import Signature, elaborate
from .term import (BOX, STAR, Abs, App, Prod, Symb, Term, Var, arrow, is_kind, positions, spine, subterm_at,
                   substitute)
from .typecheck import EMPTY_ENV, Environment, derived_type
from .utils import ASSUMPTIONS

logger = logging.getLogger(__name__)

GRAMMAR = r"""
start: _decl*

_decl: symb_decl | rule_decl | mon_decl | acc_decl | prec_decl | status_decl

symb_decl: "symb" NAME ":" term
rule_decl: "rule" term "-->" term env_clause? rho_clause? assume_clause?
env_clause: "env" bindings
rho_clause: "rho" assign ("," assign)*
assign: NAME ":=" term
assume_clause: "assume" NAME+
bindings: binding ("," binding)*
binding: NAME ":" term
mon_decl: "mon" NAME "=" "{" [ints] "}"
acc_decl: "acc" NAME "=" "{" [ints] "}"
ints: INT ("," INT)*
prec_decl: "prec" NAME ">" NAME+   -> prec_gt
         | "prec" NAME "=" NAME+   -> prec_eq
status_decl: "status" NAME "=" "lex" mul_group+
mul_group: "(" "mul" NAME+ ")"

?term: app "->" term                -> arrow
     | "(" NAME ":" term ")" term   -> prod
     | "[" NAME ":" term "]" term   -> abs
     | app
?app: atom
    | app atom                      -> apply
?atom: NAME                         -> name
     | "*"                          -> star
     | "(" term ")"

NAME: /[A-Za-z0-9][A-Za-z0-9_']*/
COMMENT: /#[^\n]*/
%import common.INT
%import common.WS
%ignore WS
%ignore COMMENT
"""

_parser = Lark(GRAMMAR, parser="lalr", start=["start", "term", "bindings"], propagate_positions=True,
               maybe_placeholders=True)


@dataclass
class SymbDecl:
    name: str
    type: Term
    line: Optional[int] = None

    def __str__(self):
        return f"symb {self.name} : {self.type}"


@dataclass
class RuleDecl:
    lhs: Term
    rhs: Term
    env: Optional[List[Tuple[str, Term]]] = None
    rho: Optional[List[Tuple[str, Term]]] = None
    assume: List[str] = field(default_factory=list)
    line: Optional[int] = None

    def __str__(self):
        s = f"rule {self.lhs} --> {self.rhs}"
        if self.env is not None:
            s += " env " + ", ".join(f"{x} : {T}" for x, T in self.env)
        if self.rho is not None:
            s += " rho " + ", ".join(f"{x} := {v}" for x, v in self.rho)
        if self.assume:
            s += " assume " + " ".join(self.assume)
        return s


@dataclass
class IndexDecl:
    kind: str
    name: str
    indices: List[int]
    line: Optional[int] = None

    def __str__(self):
        return f"{self.kind} {self.name} = {{{', '.join(map(str, self.indices))}}}"


@dataclass
class PrecDecl:
    name: str
    op: str
    others: List[str]
    line: Optional[int] = None

    def __str__(self):
        return f"prec {self.name} {self.op} {' '.join(self.others)}"


@dataclass
class StatusDecl:
    name: str
    slots: List[List[int]]
    line: Optional[int] = None

    def __str__(self):
        return f"status {self.name} = lex " + " ".join("(mul " + " ".join(f"x{k}" for k in s) + ")" for s in self.slots)


Declaration = Union[SymbDecl, RuleDecl, IndexDecl, PrecDecl, StatusDecl]


@dataclass
class SourceFile:
    declarations: List[Declaration] = field(default_factory=list)
    path: Optional[str] = None

    def of_type(self, cls) -> list:
        return [d for d in self.declarations if isinstance(d, cls)]

    def __str__(self):
        return print_source(self)


class _ToAst(Transformer):
    """Parse tree to declarations. Every name becomes a starred Var; resolution comes later."""

    def name(self, children):
        return Var(str(children[0]))

    def star(self, _):
        return STAR

    def apply(self, children):
        return App(children[0], children[1])

    def arrow(self, children):
        return arrow(children[0], children[1])

    def prod(self, children):
        x, T, body = children
        return Prod(Var(str(x)), T, body)

    def abs(self, children):
        x, T, body = children
        return Abs(Var(str(x)), T, body)

    def binding(self, children):
        return str(children[0]), children[1]

    def bindings(self, children):
        return list(children)

    def assign(self, children):
        return str(children[0]), children[1]

    def env_clause(self, children):
        return "env", children[0]

    def rho_clause(self, children):
        return "rho", list(children)

    def assume_clause(self, children):
        names = [str(c) for c in children]
        unknown = [n for n in names if n not in ASSUMPTIONS]
        if unknown:
            raise ParseError(f"unknown assumption {', '.join(unknown)}", children[0].line, children[0].column)
        return "assume", names

    def ints(self, children):
        return [int(c) for c in children]

    @v_args(meta=True)
    def symb_decl(self, meta, children):
        return SymbDecl(str(children[0]), children[1], meta.line)

    @v_args(meta=True)
    def rule_decl(self, meta, children):
        clauses = dict(children[2:])
        return RuleDecl(children[0], children[1], clauses.get("env"), clauses.get("rho"), clauses.get("assume", []),
                        meta.line)

    @v_args(meta=True)
    def mon_decl(self, meta, children):
        return IndexDecl("mon", str(children[0]), children[1] or [], meta.line)

    @v_args(meta=True)
    def acc_decl(self, meta, children):
        return IndexDecl("acc", str(children[0]), children[1] or [], meta.line)

    @v_args(meta=True)
    def prec_gt(self, meta, children):
        return PrecDecl(str(children[0]), ">", [str(c) for c in children[1:]], meta.line)

    @v_args(meta=True)
    def prec_eq(self, meta, children):
        return PrecDecl(str(children[0]), "=", [str(c) for c in children[1:]], meta.line)

    def mul_group(self, children):
        slot = []
        for tok in children:
            if not (tok.startswith("x") and tok[1:].isdigit()):
                raise ParseError(f"status arguments are written x1, x2, ...; got {tok}", tok.line, tok.column)
            slot.append(int(tok[1:]))
        return slot

    @v_args(meta=True)
    def status_decl(self, meta, children):
        return StatusDecl(str(children[0]), list(children[1:]), meta.line)

    def start(self, children):
        return SourceFile(list(children))


def _parse(text: str, start: str):
    try:
        tree = _parser.parse(text, start=start)
        return _ToAst().transform(tree)
    except lark.exceptions.VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc from None
        raise ParseError(str(e.orig_exc)) from e
    except lark.exceptions.UnexpectedInput as e:
        raise ParseError(f"syntax error: {_describe(e)}", e.line, e.column) from None


def _describe(e) -> str:
    if isinstance(e, lark.exceptions.UnexpectedToken):
        if e.token.type == "$END":
            return "unexpected end of input"
        return f"unexpected {e.token!r}"
    if isinstance(e, lark.exceptions.UnexpectedCharacters):
        return f"unexpected character {e.char!r}"
    return "unexpected end of input"


def parse(text: str, path: Optional[str] = None) -> SourceFile:
    source = _parse(text, "start")
    source.path = path
    return source


def parse_raw_term(text: str) -> Term:
    return _parse(text, "term")


def print_source(source: SourceFile) -> str:
    return "".join(f"{d}\n" for d in source.declarations)


def _resolve(t: Term, scope: Dict[str, Var], symbols: Set[str], free: Optional[Dict[str, Var]], where: str) -> Term:
    match t:
        case Var(name):
            if name in scope:
                return scope[name]
            if name in symbols:
                return Symb(name)
            if free is None:
                raise SignatureError(f"{where} is open: unknown name {name}")
            return free.setdefault(name, Var(name))
        case App(f, a):
            return App(_resolve(f, scope, symbols, free, where), _resolve(a, scope, symbols, free, where))
        case Abs(x, T, body) | Prod(x, T, body):
            T = _resolve(T, scope, symbols, free, where)
            x = Var(x.name, BOX if is_kind(T) else STAR)
            return type(t)(x, T, _resolve(body, {**scope, x.name: x}, symbols, free, where))
    return t


def _resolve_bindings(bindings: Sequence[Tuple[str, Term]], symbols: Set[str], where: str,
                      scope: Optional[Dict[str, Var]] = None) -> Tuple[Environment, Dict[str, Var]]:
    env, scope = EMPTY_ENV, dict(scope or {})
    for name, T in bindings:
        T = _resolve(T, scope, symbols, None, where)
        x = Var(name, BOX if is_kind(T) else STAR)
        try:
            env = env.extend(x, T)
        except TypingError as e:
            raise SignatureError(f"{where}: {e}") from e
        scope[name] = x
    return env, scope


def _sort_free_vars(sig: Signature, lhs: Term, free: Dict[str, Var]) -> Dict[Var, Var]:
    """Re-tag lhs variables whose derived type is a kind."""
    retag = {}
    seen = set()
    for p in positions(lhs):
        x = subterm_at(lhs, p)
        if not isinstance(x, Var) or x.name not in free or x.name in seen or not p:
            continue
        seen.add(x.name)
        try:
            T = derived_type(sig, lhs, p)
        except (InvalidPosition, TypingError):
            continue
        if is_kind(T):
            retag[x] = Var(x.name, BOX)
    return retag


def _rule_triple(decl: RuleDecl, symbols: Set[str], name: str):
    scope: Dict[str, Var] = {}
    env = None
    if decl.env is not None:
        env, scope = _resolve_bindings(decl.env, symbols, f"environment of rule {name}")
    free: Dict[str, Var] = {}
    lhs = _resolve(decl.lhs, scope, symbols, free, f"rule {name}")
    rho = [(_resolve(Var(x), scope, symbols, free, f"rule {name}"), _resolve(v, scope, symbols, free, f"rule {name}"))
           for x, v in decl.rho or ()]
    rhs = _resolve(decl.rhs, scope, symbols, free, f"rule {name}")
    return lhs, rhs, env, rho, free


def _located(line, fn, *args):
    try:
        return fn(*args)
    except SignatureError as e:
        if e.line is not None or line is None:
            raise
        raise SignatureError(str(e), line) from None


def build_system(source: SourceFile) -> System:
    """Resolve names, elaborate the signature and build the rules of a parsed file."""
    declared: List[Tuple[str, Term]] = []
    visible: Set[str] = set()
    lines: Dict[Tuple[str, object], int] = {}
    for d in source.of_type(SymbDecl):
        if d.name in visible:
            raise SignatureError(f"symbol {d.name} declared twice", d.line)
        T = _located(d.line, _resolve, d.type, {}, visible, None, f"type of {d.name}")
        declared.append((d.name, T))
        visible.add(d.name)
        lines["symb", d.name] = d.line
    counts: Dict[str, int] = defaultdict(int)
    pending = []
    for d in source.of_type(RuleDecl):
        head, _ = spine(d.lhs)
        head_name = head.name if isinstance(head, (Var, Symb)) else "rule"
        counts[head_name] += 1
        name = f"{head_name}.{counts[head_name]}"
        pending.append((name, d, _located(d.line, _rule_triple, d, visible, name)))
        lines["rule", name] = d.line
    precs = source.of_type(PrecDecl)
    lines.update((("prec", i), d.line) for i, d in enumerate(precs))
    for d in source.of_type(IndexDecl):
        lines.setdefault((d.kind, d.name), d.line)
    for d in source.of_type(StatusDecl):
        lines.setdefault(("status", d.name), d.line)
    sig = elaborate(
        declared,
        rules=[(name, lhs, rhs) for name, _, (lhs, rhs, *_) in pending],
        precedence=[(d.name, d.op, d.others) for d in precs],
        mon=_table([d for d in source.of_type(IndexDecl) if d.kind == "mon"], "mon", lambda d: d.indices),
        acc=_table([d for d in source.of_type(IndexDecl) if d.kind == "acc"], "acc", lambda d: d.indices),
        statuses=_table(source.of_type(StatusDecl), "status", lambda d: d.slots),
        lines=lines,
    )
    rules = []
    for name, d, (lhs, rhs, env, rho, free) in pending:
        retag = _sort_free_vars(sig, lhs, free)
        if retag:
            lhs, rhs = substitute(lhs, retag), substitute(rhs, retag)
            rho = [(retag.get(x, x), substitute(v, retag)) for x, v in rho]
        rules.append(make_rule(sig, name, lhs, rhs, env, dict(rho), d.assume, d.line))
    logger.info("%s: %d symbols, %d rules", source.path or "<input>", len(declared), len(rules))
    return System(sig, rules, source.path)


def _table(decls, kind, value):
    out = {}
    for d in decls:
        if d.name in out:
            raise SignatureError(f"{kind} {d.name} declared twice", d.line)
        out[d.name] = value(d)
    return out


def load_system(text: str, path: Optional[str] = None) -> System:
    return build_system(parse(text, path))


def parse_env(system: System, text: str) -> Environment:
    if not text.strip():
        return EMPTY_ENV
    bindings = _parse(text, "bindings")
    env, _ = _resolve_bindings(bindings, set(system.signature.symbols), "environment")
    return env


def parse_term(system: System, text: str, env: Optional[Environment] = None) -> Term:
    scope = {x.name: x for x, _ in env or EMPTY_ENV}
    return _resolve(parse_raw_term(text), scope, set(system.signature.symbols), None, "term")
