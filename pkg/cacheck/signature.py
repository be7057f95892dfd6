import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from .errors import SignatureError, TypingError
from .term import (BOX, Sort, Symb, Term, Var, alpha_eq, free_vars, signed_positions, spine, symbol_positions,
                   symbols, unfold_product, var_positions)
from .typecheck import EMPTY_ENV, TypeChecker
from .utils import Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Status:
    slots: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not self.slots or any(not slot for slot in self.slots):
            raise SignatureError("a status needs at least one non-empty mul group")
        if any(k < 1 for slot in self.slots for k in slot):
            raise SignatureError("status indices start at 1")

    @property
    def arity(self):
        return max(k for slot in self.slots for k in slot)

    def select(self, args: Sequence) -> List[list]:
        return [[args[k - 1] for k in slot] for slot in self.slots]

    def __str__(self):
        return "lex " + " ".join("(mul " + " ".join(f"x{k}" for k in slot) + ")" for slot in self.slots)


class Precedence:
    """Quasi-order on symbol names kept as a digraph; equivalence classes are its strongly connected components."""

    def __init__(self, names: Iterable[str] = ()):
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(names)
        self.strict = set()
        self._cache = None

    def add(self, f: str, op: str, g: str):
        self._cache = None
        self.graph.add_edge(f, g)
        if op == "=":
            self.graph.add_edge(g, f)
        elif op == ">":
            self.strict.add((f, g))
        else:
            raise SignatureError(f"unknown precedence operator {op!r}")

    def _compute(self):
        if self._cache is None:
            cond = nx.condensation(self.graph)
            members = cond.graph["mapping"]
            for f, g in self.strict:
                if members[f] == members[g]:
                    raise SignatureError(f"precedence is not well-founded: {f} > {g} lies on a cycle")
            below = {c: nx.descendants(cond, c) for c in cond.nodes}
            self._cache = (members, below, cond)
        return self._cache

    def check(self):
        self._compute()

    def eq(self, f: str, g: str) -> bool:
        if f == g:
            return True
        members, _, _ = self._compute()
        return f in members and g in members and members[f] == members[g]

    def gt(self, f: str, g: str) -> bool:
        members, below, _ = self._compute()
        if f not in members or g not in members:
            return False
        return members[g] in below[members[f]]

    def ge(self, f: str, g: str) -> bool:
        return self.eq(f, g) or self.gt(f, g)

    def equivalence_class(self, f: str) -> FrozenSet[str]:
        members, _, cond = self._compute()
        if f not in members:
            return frozenset((f,))
        return frozenset(cond.nodes[members[f]]["members"])


@dataclass
class SymbolDecl:
    name: str
    type: Term
    sort: Sort
    defined: bool = False
    status: Optional[Status] = None
    max_rule_arity: int = 0

    @property
    def arity(self):
        return len(unfold_product(self.type)[0])

    @property
    def is_predicate(self):
        return self.sort == BOX

    @property
    def definedness(self):
        return "defined" if self.defined else "constant"


class PredicateClass(Enum):
    PRIMITIVE = "primitive"
    BASIC = "basic"
    STRICTLY_POSITIVE = "strictly positive"
    GENERAL = "general"


@dataclass
class InductiveStructure:
    mon: Dict[str, FrozenSet[int]] = field(default_factory=dict)
    acc: Dict[str, FrozenSet[int]] = field(default_factory=dict)


class Signature:
    def __init__(self, symbols: Iterable[SymbolDecl] = (), precedence: Optional[Precedence] = None,
                 structure: Optional[InductiveStructure] = None):
        self.symbols: Dict[str, SymbolDecl] = {d.name: d for d in symbols}
        self.precedence = precedence or Precedence(self.symbols)
        self.structure = structure or InductiveStructure()
        self._classes: Dict[FrozenSet[str], PredicateClass] = {}

    def __contains__(self, name):
        return name in self.symbols

    def __getitem__(self, name) -> SymbolDecl:
        return self.symbols[name]

    def __iter__(self):
        return iter(self.symbols.values())

    def type_of(self, name: str) -> Optional[Term]:
        decl = self.symbols.get(name)
        return decl.type if decl else None

    @property
    def mon(self) -> Mapping[str, FrozenSet[int]]:
        return self.structure.mon

    def is_predicate(self, name):
        return name in self.symbols and self.symbols[name].is_predicate

    def is_defined(self, name):
        return name in self.symbols and self.symbols[name].defined

    def constant_predicates(self) -> List[str]:
        return [d.name for d in self if d.is_predicate and not d.defined]

    def defined_predicates(self) -> List[str]:
        return [d.name for d in self if d.is_predicate and d.defined]

    def is_constant_predicate(self, name):
        return self.is_predicate(name) and not self.is_defined(name)

    def binders(self, f: str) -> List[Tuple[Var, Term]]:
        return unfold_product(self.symbols[f].type)[0]

    def output(self, f: str) -> Optional[Tuple[str, List[Term]]]:
        """(C, v) when f : (y:U) C v with C a constant predicate symbol."""
        _, cod = unfold_product(self.symbols[f].type)
        head, args = spine(cod)
        if isinstance(head, Symb) and self.is_constant_predicate(head.name):
            return head.name, args
        return None

    def producers(self, C: str) -> List[str]:
        return [d.name for d in self if (out := self.output(d.name)) is not None and out[0] == C]

    def constructors(self, C: str) -> List[str]:
        return [f for f in self.producers(C) if not self.is_defined(f)]

    def mon_of(self, C: str) -> FrozenSet[int]:
        if not self.is_constant_predicate(C):
            return frozenset()
        return self.structure.mon.get(C, frozenset())

    def acc_of(self, f: str) -> FrozenSet[int]:
        if f not in self.symbols or self.output(f) is None:
            return frozenset()
        declared = self.structure.acc.get(f)
        if declared is not None:
            return declared
        return frozenset(range(1, self.symbols[f].arity + 1))

    def predicate_indices(self, C: str) -> List[int]:
        return [i for i, (y, _) in enumerate(self.binders(C), 1) if y.sort == BOX]

    def predicate_args(self, C: str, args: Sequence[Term]) -> List[Term]:
        return [args[i - 1] for i in self.predicate_indices(C) if i <= len(args)]

    def status_of(self, f: str) -> Optional[Status]:
        decl = self.symbols[f]
        if decl.status is not None:
            return decl.status
        binders = self.binders(f)
        if not binders:
            return None
        inductive = []
        for i, (_, T) in enumerate(binders, 1):
            head, _ = spine(T)
            if isinstance(head, Symb) and self.is_constant_predicate(head.name):
                inductive.append(i)
        return Status((tuple(inductive or range(1, len(binders) + 1)),))

    def pred_class(self, C: str) -> FrozenSet[str]:
        return frozenset(D for D in self.precedence.equivalence_class(C) if self.is_constant_predicate(D)) | {C}

    def pred_gt(self, C: str, D: str) -> bool:
        return self.is_constant_predicate(C) and self.is_constant_predicate(D) and self.precedence.gt(C, D)


def _sort_type(sig: Signature, name: str, T: Term) -> Sort:
    if T.fv:
        raise SignatureError(f"type of {name} is open: free {', '.join(sorted(x.name for x in T.fv))}")
    try:
        return TypeChecker(sig).sort_of(EMPTY_ENV, T)
    except TypingError as e:
        raise SignatureError(f"type of {name} is not sorted: {e}") from e


def elaborate(declarations: Sequence[Tuple[str, Term]], rules: Sequence[Tuple[str, Term, Term]] = (),
              precedence: Sequence[Tuple[str, str, Sequence[str]]] = (), mon: Optional[Mapping[str, Iterable[int]]] = None,
              acc: Optional[Mapping[str, Iterable[int]]] = None,
              statuses: Optional[Mapping[str, Sequence[Sequence[int]]]] = None,
              lines: Optional[Mapping[Tuple[str, object], int]] = None) -> Signature:
    """Build a checked signature.

    `rules` are (name, lhs, rhs) triples, used for definedness, arities and
    precedence compatibility. `lines` maps ("symb", name), ("rule", name),
    ("prec", i), ("status", f), ("mon", C) and ("acc", f) to source lines.
    """
    lines = lines or {}

    def error(message, *key):
        return SignatureError(message, lines.get(key))

    sig = Signature()
    for name, T in declarations:
        if name in sig:
            raise error(f"symbol {name} declared twice", "symb", name)
        try:
            s = _sort_type(sig, name, T)
        except SignatureError as e:
            raise error(str(e), "symb", name) from None
        sig.symbols[name] = SymbolDecl(name, T, s)
    prec = Precedence(sig.symbols)
    for i, (f, op, gs) in enumerate(precedence):
        for g in (f, *gs):
            if g not in sig:
                raise error(f"precedence mentions undeclared symbol {g}", "prec", i)
        for g in gs:
            prec.add(f, op, g)
    prec.check()
    sig.precedence = prec
    for rule_name, lhs, rhs in rules:
        head, args = spine(lhs)
        if not isinstance(head, Symb) or head.name not in sig:
            raise error(f"rule {rule_name}: left-hand side {lhs} is not headed by a declared symbol", "rule", rule_name)
        decl = sig[head.name]
        decl.defined = True
        decl.max_rule_arity = max(decl.max_rule_arity, len(args))
        if len(args) > decl.arity:
            raise error(f"rule {rule_name}: {head.name} takes {decl.arity} arguments, got {len(args)}",
                        "rule", rule_name)
        for g in sorted(symbols(rhs)):
            if g not in sig:
                raise error(f"rule {rule_name}: undeclared symbol {g}", "rule", rule_name)
            if not prec.ge(head.name, g):
                raise error(f"rule {rule_name}: precedence violation, {head.name} >= {g} does not hold",
                            "rule", rule_name)
    for f, slots in (statuses or {}).items():
        if f not in sig:
            raise error(f"status for undeclared symbol {f}", "status", f)
        status = Status(tuple(tuple(slot) for slot in slots))
        if status.arity > sig[f].arity:
            raise error(f"status {status} of {f} exceeds its {sig[f].arity} arguments", "status", f)
        sig[f].status = status
    for f in sig.symbols:
        for g in prec.equivalence_class(f):
            if g != f and sig.is_defined(f) and sig.is_defined(g) and sig.status_of(f) != sig.status_of(g):
                raise error(f"equivalent symbols {f} and {g} have different statuses", "status", f)
    for C, indices in (mon or {}).items():
        indices = frozenset(indices)
        if not sig.is_predicate(C) or sig.is_defined(C):
            raise error(f"mon declared for {C}, which is not a constant predicate", "mon", C)
        bad = indices - set(sig.predicate_indices(C))
        if bad:
            raise error(f"mon {C}: arguments {sorted(bad)} are not predicate arguments", "mon", C)
        sig.structure.mon[C] = indices
    for f, indices in (acc or {}).items():
        if f not in sig:
            raise error(f"acc declared for undeclared symbol {f}", "acc", f)
        indices = frozenset(indices)
        if any(j < 1 or j > sig[f].arity for j in indices):
            raise error(f"acc {f}: indices must lie in 1..{sig[f].arity}", "acc", f)
        if sig.output(f) is None:
            logger.warning("acc %s ignored: its output type is not a constant predicate", f)
        sig.structure.acc[f] = indices
    return sig


def admissible_check(sig: Signature) -> Dict[str, Verdict]:
    """Conditions I2-I6 for every constant predicate C, producer f of C and accessible j."""
    out: Dict[str, Verdict] = {}
    for C in sig.constant_predicates():
        cls = sig.pred_class(C)
        greater = {D for D in sig.constant_predicates() if sig.pred_gt(D, C)}
        defined_preds = set(sig.defined_predicates())
        for f in sig.producers(C):
            _, v = sig.output(f)
            binders = sig.binders(f)
            for j in sorted(sig.acc_of(f)):
                U = binders[j - 1][1]
                key = f"{f}/{j}"
                positive = signed_positions(U, 1, sig.mon)
                negative = symbol_positions(U, cls) - positive
                out[f"I3/{key}"] = (Verdict.fails(f"{C} occurs at a non-positive position of {U} in the type of {f}")
                                    if negative else Verdict.holds())
                bigger = symbols(U) & greater
                out[f"I4/{key}"] = (Verdict.fails(f"{', '.join(sorted(bigger))} greater than {C} in {U}")
                                    if bigger else Verdict.holds())
                defined = symbols(U) & defined_preds
                out[f"I5/{key}"] = (Verdict.fails(f"defined predicate {', '.join(sorted(defined))} in {U}")
                                    if defined else Verdict.holds())
                missing, witnesses, mon_bad = [], [], []
                for Y in sorted(free_vars(U, BOX), key=lambda y: y.name):
                    iota = next((i for i, vi in enumerate(v, 1) if vi == Y), None)
                    if iota is None:
                        missing.append(Y.name)
                        continue
                    witnesses.append(f"{Y.name}->{iota}")
                    if iota in sig.mon_of(C) and not var_positions(U, Y) <= positive:
                        mon_bad.append(Y.name)
                out[f"I6/{key}"] = (Verdict.fails(f"predicate variables {', '.join(missing)} of {U} are not parameters of {C}")
                                    if missing else Verdict.holds(", ".join(witnesses)))
                out[f"I2/{key}"] = (Verdict.fails(f"monotonic parameters {', '.join(mon_bad)} at non-positive positions of {U}")
                                    if mon_bad else Verdict.holds())
    return out


def classify_predicate(sig: Signature, C: str) -> PredicateClass:
    cls = sig.pred_class(C)
    if cls in sig._classes:
        return sig._classes[cls]
    arg_types = [sig.binders(f)[j - 1][1] for D in sorted(cls) for f in sig.producers(D) for j in sorted(sig.acc_of(f))]

    def head_of(U):
        head, _ = spine(U)
        return head.name if isinstance(head, Symb) else None

    def primitive_arg(U):
        E = head_of(U)
        if E is None or not sig.is_constant_predicate(E):
            return False
        return E in cls or (sig.pred_gt(C, E) and classify_predicate(sig, E) is PredicateClass.PRIMITIVE)

    def basic_arg(U):
        return not (symbols(U) & cls) or head_of(U) in cls

    def strictly_positive_arg(U):
        if not (symbols(U) & cls):
            return True
        binders, cod = unfold_product(U)
        return head_of(cod) in cls and not any(symbols(V) & cls for _, V in binders)

    if all(primitive_arg(U) for U in arg_types):
        result = PredicateClass.PRIMITIVE
    elif all(basic_arg(U) for U in arg_types):
        result = PredicateClass.BASIC
    elif all(strictly_positive_arg(U) for U in arg_types):
        result = PredicateClass.STRICTLY_POSITIVE
    else:
        result = PredicateClass.GENERAL
    sig._classes[cls] = result
    logger.debug("predicate %s is %s", C, result.value)
    return result


def strictly_positive_positions(sig: Signature, f: str) -> Dict[int, Term]:
    """SP(f) as a map from status slot (1-based) to its witness type."""
    status = sig.status_of(f)
    if status is None:
        return {}
    binders = sig.binders(f)
    out = {}
    for i, slot in enumerate(status.slots, 1):
        if any(k > len(binders) for k in slot):
            continue
        types = [binders[k - 1][1] for k in slot]
        head, a = spine(types[0])
        if not isinstance(head, Symb) or not sig.is_constant_predicate(head.name):
            continue
        C = head.name
        if classify_predicate(sig, C) is PredicateClass.GENERAL:
            continue
        params = sig.predicate_args(C, a)
        same = True
        for T in types[1:]:
            h, u = spine(T)
            if h != head or len(sig.predicate_args(C, u)) != len(params) or not all(
                    alpha_eq(x, y) for x, y in zip(sig.predicate_args(C, u), params)):
                same = False
        if same:
            out[i] = types[0]
    return out
