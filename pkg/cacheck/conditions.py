import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from .errors import SignatureError
from .reduction import critical_pairs, joinable
from .rules import Rule, System, s3_check, s4_check, s5_check, syntactic_check
from .schema import general_schema_check, rpo_gt
from .signature import PredicateClass, admissible_check, classify_predicate
from .term import (BOX, STAR, Abs, Symb, Term, Var, alpha_eq, free_vars, is_algebraic, signed_positions, spine,
                   symbol_positions, symbols, unfold_product)
from .typecheck import rhs_shape_check
from .utils import Config, Outcome, Verdict, run_parallel

logger = logging.getLogger(__name__)

WILDCARD = Var("_")


@dataclass
class SystemFlags:
    first_order: Verdict
    primitive: Verdict
    simple: Verdict
    small: Verdict
    positive: Verdict
    safe: Verdict
    kappa: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Verdict]:
        return {k: getattr(self, k) for k in ("first_order", "primitive", "simple", "small", "positive", "safe")}


class PartitionSource(str, Enum):
    DECLARED = "declared"
    INFERRED = "inferred"


class Partition(BaseModel):
    f1: List[str] = []
    fw: List[str] = []
    source: PartitionSource = PartitionSource.INFERRED

    def __str__(self):
        return f"F1 = {{{', '.join(self.f1)}}}, Fw = {{{', '.join(self.fw)}}} ({self.source.value})"


class ConditionReport(BaseModel):
    source: Optional[str] = None
    partition: Optional[Partition] = None
    verdicts: Dict[str, Verdict] = {}
    overall: Verdict = Verdict.holds()

    def exit_code(self, strict: bool = False) -> int:
        outcome = self.overall.outcome
        if outcome is Outcome.HOLDS:
            return 0
        if outcome is Outcome.FAILS or (strict and outcome is Outcome.ASSUMED):
            return 1
        return 2

    def render(self) -> str:
        width = max((len(k) for k in self.verdicts), default=0)
        lines = [f"# {self.source}"] if self.source else []
        if self.partition is not None:
            lines.append(f"partition: {self.partition}")
        for key, v in self.verdicts.items():
            line = f"{key.ljust(width)}  {v.outcome.value}"
            lines.append(f"{line}  {v.reason}" if v.reason else line)
        lines.append(f"overall: {self.overall}")
        return "\n".join(lines)


def _fails_or_holds(problems: Sequence[str], reason: str = "") -> Verdict:
    return Verdict.fails("; ".join(problems)) if problems else Verdict.holds(reason)


def _class_name(G: Iterable[str]) -> str:
    return "=".join(sorted(G))


def _exhaustive(sig, rows: List[List[Term]], types: List[Term]) -> Optional[bool]:
    """Whether the pattern rows cover every constructor-normal argument tuple; None when undecided."""
    if not rows:
        return False
    col = next((i for i in range(len(types)) if any(not isinstance(row[i], Var) for row in rows)), None)
    if col is None:
        return True
    head, _ = spine(types[col])
    if not isinstance(head, Symb) or not sig.is_constant_predicate(head.name):
        return None
    if classify_predicate(sig, head.name) not in (PredicateClass.PRIMITIVE, PredicateClass.BASIC):
        return None
    undecided = False
    for c in sig.constructors(head.name):
        binders = sig.binders(c)
        k = len(binders)
        specialized = []
        for row in rows:
            p = row[col]
            if isinstance(p, Var):
                expanded = [WILDCARD] * k
            else:
                h, args = spine(p)
                if h != Symb(c) or len(args) != k:
                    continue
                expanded = list(args)
            specialized.append(row[:col] + expanded + row[col + 1:])
        found = _exhaustive(sig, specialized, types[:col] + [T for _, T in binders] + types[col + 1:])
        if found is False:
            logger.debug("case %s of %s is not covered", c, head.name)
            return False
        undecided = undecided or found is None
    return None if undecided else True


class ConditionChecker:
    """Checks of the strong normalization and consistency conditions on one system, with per-rule caches."""

    def __init__(self, system: System, config: Optional[Config] = None):
        self.system = system
        self.sig = system.signature
        self.config = config or Config()
        self._schema: Dict[str, Verdict] = {}

    @property
    def fuel(self):
        return self.config.fuel

    def schema(self, rule: Rule) -> Verdict:
        if rule.name not in self._schema:
            self._schema[rule.name] = general_schema_check(self.sig, rule, self.system.fragment(rule), self.fuel)
        return self._schema[rule.name]

    def prefetch(self, rules: Sequence[Rule]):
        todo = [r for r in rules if r.name not in self._schema]
        results = run_parallel(lambda r: general_schema_check(self.sig, r, self.system.fragment(r), self.fuel),
                               todo, self.config.max_workers)
        self._schema.update({r.name: v for r, v in zip(todo, results)})

    def computable(self, G: Iterable[str]) -> Verdict:
        verdicts = [self.schema(r) for r in self.system.rules_for(G)]
        return Verdict.combine(verdicts)

    def first_order_shaped(self, g: str) -> bool:
        if not all(is_algebraic(r.rhs) for r in self.system.rules_for([g])):
            return False
        if self.sig.is_predicate(g):
            return True
        out = self.sig.output(g)
        return out is not None and classify_predicate(self.sig, out[0]) is PredicateClass.PRIMITIVE

    def rpo_decreasing(self, g: str) -> List[str]:
        """Rules of g whose left-hand side is not above the right-hand side in the path ordering."""
        return [r.name for r in self.system.rules_for([g]) if not rpo_gt(self.sig, r.lhs, r.rhs)]

    def flags(self, G: Iterable[str]) -> SystemFlags:
        sig, G = self.sig, set(G)
        rules = self.system.rules_for(G)

        problems = [f"{r.name}: right-hand side {r.rhs} is not algebraic" for r in rules if not is_algebraic(r.rhs)]
        for g in sorted(G):
            if sig.is_predicate(g):
                continue
            out = sig.output(g)
            if out is None or classify_predicate(sig, out[0]) is not PredicateClass.PRIMITIVE:
                problems.append(f"{g}: output type is not a primitive predicate")
        first_order = _fails_or_holds(problems)

        problems = []
        for r in rules:
            body = r.rhs
            while isinstance(body, Abs):
                body = body.body
            head, _ = spine(body)
            ok = isinstance(head, Symb) and (head.name in G or (
                sig.is_constant_predicate(head.name)
                and classify_predicate(sig, head.name) is PredicateClass.PRIMITIVE))
            if not ok:
                problems.append(f"{r.name}: right-hand side {r.rhs} is not headed by a symbol of the class "
                                "or a primitive predicate")
        primitive = _fails_or_holds(problems)

        pairs = critical_pairs(self.system.rewrite_system, among=[r.name for r in rules])
        simple = _fails_or_holds([str(cp) for cp in pairs[:3]] + ([f"{len(pairs) - 3} more"] if len(pairs) > 3 else []))

        problems, kappa = [], {}
        for r in rules:
            witnesses = {}
            for x in sorted(free_vars(r.rhs, BOX), key=lambda v: v.name):
                k = next((i for i, a in enumerate(r.args, 1) if a == x), None)
                if k is None:
                    problems.append(f"{r.name}: predicate variable {x.name} is not an argument of the left-hand side")
                else:
                    witnesses[x.name] = k
            kappa[r.name] = witnesses
        small = _fails_or_holds(problems, ", ".join(f"{n}: {w}" for n, w in kappa.items() if w))

        problems = []
        for r in rules:
            bad = symbol_positions(r.rhs, G) - signed_positions(r.rhs, 1, sig.mon)
            if bad:
                problems.append(f"{r.name}: {_class_name(G)} occurs negatively in {r.rhs}")
        positive = _fails_or_holds(problems)

        safe = _fails_or_holds([p for r in rules for p in self._unsafe(r)])
        return SystemFlags(first_order, primitive, simple, small, positive, safe, kappa)

    def _unsafe(self, rule: Rule) -> List[str]:
        binders, U = unfold_product(self.sig.type_of(rule.head))
        params = []
        for i, (x, _) in enumerate(binders):
            later = [T for _, T in binders[i + 1:]] + [U]
            if x.sort == BOX and any(x in T.fv for T in later):
                params.append((i, x))
        images = {}
        problems = []
        for i, x in params:
            image = rule.apply_rho(rule.args[i]) if i < len(rule.args) else x
            if not (isinstance(image, Var) and image.sort == BOX and image in rule.env):
                problems.append(f"{rule.name}: parameter {x.name} is matched by {image}")
            elif image in images:
                problems.append(f"{rule.name}: parameters {images[image]} and {x.name} are both matched by {image.name}")
            else:
                images[image] = x.name
        return problems

    def a3(self) -> Dict[str, Verdict]:
        out = {}
        classes = sorted({frozenset(self.sig.precedence.equivalence_class(f)) & set(self.sig.defined_predicates())
                          for f in self.sig.defined_predicates()}, key=_class_name)
        for G in classes:
            flags = self.flags(G)
            key = f"A3/{_class_name(G)}"
            if flags.primitive.held:
                out[key] = Verdict.holds("(p) primitive")
                continue
            q = Verdict.combine([flags.positive, flags.small, flags.simple])
            if q.held:
                out[key] = Verdict.holds("(q) positive, small and simple")
                continue
            r = Verdict.combine([self.computable(G), flags.small, flags.simple])
            if r.held:
                out[key] = Verdict.holds("(r) computable, small and simple")
                continue
            reason = f"(p) {flags.primitive.reason}; (q) {q.reason}; (r) {r.reason}"
            out[key] = Verdict(outcome=Outcome.UNDECIDED if r.outcome is Outcome.UNDECIDED else Outcome.FAILS,
                               reason=reason)
        return {"A3": Verdict.combine(out.values()), **out}

    def infer_partition(self) -> Tuple[Partition, List[str]]:
        sig = self.sig
        defined = sorted(d.name for d in sig if d.defined)
        declared = self.config.partition
        if declared:
            listed = set(declared.get("f1", ())) | set(declared.get("fw", ()))
            unknown = sorted(listed - set(defined))
            if unknown:
                raise SignatureError(f"partition lists {', '.join(unknown)}, which are not defined symbols")
            f1 = set(declared.get("f1", ()))
            return Partition(f1=sorted(f1), fw=[g for g in defined if g not in f1],
                             source=PartitionSource.DECLARED), []
        self.prefetch(self.system.rules)
        shaped = {g for g in defined if self.first_order_shaped(g)}
        higher = {g for g in defined if self.computable([g]).held and self.flags([g]).safe.held}
        f1 = {g for g in shaped if g not in higher}
        problems: Dict[str, str] = {}
        changed = True
        while changed:
            changed = False
            for r in self.system.rules_for(f1):
                for g in sorted(symbols(r.lhs) | symbols(r.rhs)):
                    if not sig.is_defined(g) or g in f1:
                        continue
                    if g in shaped:
                        f1.add(g)
                        changed = True
                    else:
                        problems[g] = f"{g} is higher-order but occurs in the first-order rule {r.name}"
        if "fo-termination" not in self.config.assume:
            for g in sorted(f1):
                stuck = self.rpo_decreasing(g)
                if stuck and g not in higher:
                    problems[g] = (f"{g} can be put neither in F1 (rules {', '.join(stuck)} not decreasing) "
                                   f"nor in Fw ({self.computable([g]).reason or 'unsafe'})")
        partition = Partition(f1=sorted(f1), fw=[g for g in defined if g not in f1])
        logger.info("inferred partition %s", partition)
        return partition, [problems[g] for g in sorted(problems)]

    def a4(self, partition: Partition, problems: Sequence[str] = ()) -> Dict[str, Verdict]:
        f1, fw = set(partition.f1), set(partition.fw)
        r1, rw = self.system.rules_for(f1), self.system.rules_for(fw)
        out = {"A4(a)": self.computable(fw), "A4(b)": self.flags(fw).safe}
        mixed = [f"{r.name} mentions {', '.join(sorted((symbols(r.lhs) | symbols(r.rhs)) & fw))}"
                 for r in r1 if (symbols(r.lhs) | symbols(r.rhs)) & fw]
        out["A4(c)"] = _fails_or_holds(mixed)
        out["A4(d)"] = self.flags(f1).first_order
        if not rw:
            out["A4(e)"] = Verdict.holds("no higher-order rules")
        else:
            out["A4(e)"] = _fails_or_holds([f"{r.name} is duplicating" for r in r1 if r.duplicating])
        stuck = [n for g in sorted(f1) for n in self.rpo_decreasing(g)]
        if not stuck:
            out["A4(f)"] = Verdict.holds("first-order rules decrease in the recursive path ordering")
        elif "fo-termination" in self.config.assume:
            out["A4(f)"] = Verdict.assumed(f"termination of {', '.join(stuck)} assumed")
        else:
            out["A4(f)"] = Verdict.fails(f"{', '.join(stuck)} not decreasing in the recursive path ordering")
        overall = Verdict.combine(out.values())
        if problems:
            overall = Verdict.fails("no valid F1/Fw partition: " + "; ".join(problems))
        return {"A4": overall, **out}

    def a1(self, a4: Verdict) -> Dict[str, Verdict]:
        R = self.system.rewrite_system
        pairs = critical_pairs(R)
        bad = []
        for cp in pairs:
            v = joinable(R, cp.left, cp.right, self.fuel)
            if not v.held:
                bad.append((cp, v))
        if not bad:
            local = Verdict.holds(f"{len(pairs)} critical pairs joinable")
        else:
            cp, v = bad[0]
            local = Verdict(outcome=Outcome.UNDECIDED if any(v.outcome is Outcome.UNDECIDED for _, v in bad)
                            else Outcome.FAILS, reason=f"{cp}: {v.reason}")
        nonlinear = [r.name for r in self.system.rules if not r.left_linear]
        if "confluence" in self.config.assume:
            a1 = Verdict.assumed("confluence assumed")
        elif nonlinear:
            a1 = Verdict.undecided(f"rules {', '.join(nonlinear)} are not left-linear")
        elif not a4.ok:
            a1 = Verdict.undecided("termination of the rules is not established (A4)")
        elif not local.held:
            a1 = Verdict.undecided(local.reason)
        elif a4.outcome is Outcome.ASSUMED:
            a1 = Verdict.assumed("left-linear and locally confluent, termination assumed")
        else:
            a1 = Verdict.holds(f"left-linear, terminating and {len(pairs)} critical pairs joinable")
        return {"A1": a1, "A1/local": local}

    def consistency_of(self, f: str) -> Verdict:
        sig = self.sig
        out = sig.output(f)
        if out is not None:
            return Verdict.holds(f"(1) output type {out[0]}")
        binders, U = unfold_product(sig.type_of(f))
        if any(alpha_eq(U, T) for _, T in binders):
            return Verdict.holds(f"(2) output type {U} is an argument type")
        n = len(binders)
        if n and binders[-1][0] in free_vars(U, BOX):
            return Verdict.fails(f"(3) last argument {binders[-1][0].name} is a free predicate variable of {U}")
        rows = [list(r.args) + [WILDCARD] * (n - len(r.args))
                for r in self.system.rules_for([f]) if r.left_linear]
        complete = _exhaustive(sig, rows, [T for _, T in binders])
        if complete is None:
            return Verdict.undecided(f"(3) cannot decide whether the rules of {f} cover every case")
        if not complete:
            return Verdict.fails(f"(3) rules of {f} do not cover every case")
        constructors = sorted({c for r in rows for a in r for c in symbols(a)})
        return Verdict.holds(f"(3) completely defined over {{{', '.join(constructors)}}}" if constructors
                             else "(3) completely defined")

    def consistency(self, a1: Verdict) -> Dict[str, Verdict]:
        out = {f"consistency/{d.name}": self.consistency_of(d.name) for d in self.sig if d.sort == STAR}
        overall = Verdict.combine(list(out.values()))
        if overall.held and not a1.held:
            overall = Verdict(outcome=a1.outcome if a1.outcome is not Outcome.FAILS else Outcome.UNDECIDED,
                              reason=f"requires confluence: {a1.reason}")
        return {"consistency": overall, **out}

    def a0_rule(self, rule: Rule) -> Dict[str, Verdict]:
        sig = self.sig
        syntax, _ = syntactic_check(rule, sig)
        level = "type" if sig.is_predicate(rule.head) else "object"
        prefix = f"A0/{rule.name}"
        return {
            f"{prefix}/syntax": syntax,
            f"{prefix}/shape": rhs_shape_check(sig, rule.rhs, level, rule.lhs),
            f"{prefix}/S3": s3_check(sig, rule, self.system.fragment(rule), self.fuel),
            f"{prefix}/S4": s4_check(sig, rule),
            f"{prefix}/S5": s5_check(sig, rule, "s5" in self.config.assume),
        }

    def a0(self) -> Dict[str, Verdict]:
        per_rule = run_parallel(self.a0_rule, self.system.rules, self.config.max_workers)
        out = {k: v for d in per_rule for k, v in d.items()}
        return {"A0": Verdict.combine(out.values()), **out}

    def a2(self) -> Dict[str, Verdict]:
        found = admissible_check(self.sig)
        order = {"I2": 5, "I3": 1, "I4": 2, "I5": 3, "I6": 4}
        keys = sorted(found, key=lambda k: (k.split("/", 1)[1], order[k.split("/", 1)[0]]))
        out = {f"A2/{k}": found[k] for k in keys}
        return {"A2": Verdict.combine(out.values()), **out}


def classify_system(system: System, G: Iterable[str], config: Optional[Config] = None) -> SystemFlags:
    return ConditionChecker(system, config).flags(G)


def a3_check(system: System, config: Optional[Config] = None) -> Verdict:
    return ConditionChecker(system, config).a3()["A3"]


def infer_partition(system: System, config: Optional[Config] = None) -> Tuple[Partition, List[str]]:
    return ConditionChecker(system, config).infer_partition()


def a4_check(system: System, partition: Optional[Partition] = None, config: Optional[Config] = None) -> Dict[str, Verdict]:
    checker = ConditionChecker(system, config)
    problems: List[str] = []
    if partition is None:
        partition, problems = checker.infer_partition()
    return checker.a4(partition, problems)


def confluence_pipeline(system: System, a4: Verdict, config: Optional[Config] = None) -> Dict[str, Verdict]:
    return ConditionChecker(system, config).a1(a4)


def consistency_check(system: System, a1: Verdict, config: Optional[Config] = None) -> Dict[str, Verdict]:
    return ConditionChecker(system, config).consistency(a1)


def full_report(system: System, config: Optional[Config] = None) -> ConditionReport:
    checker = ConditionChecker(system, config)
    a0 = checker.a0()
    a2 = checker.a2()
    a3 = checker.a3()
    partition, problems = checker.infer_partition()
    a4 = checker.a4(partition, problems)
    a1 = checker.a1(a4["A4"])
    consistency = checker.consistency(a1["A1"])
    verdicts = {**a0, **a1, **a2, **a3, **a4, **consistency}
    overall = Verdict.combine(verdicts[k] for k in ("A0", "A1", "A2", "A3", "A4", "consistency"))
    logger.info("%s: %s", system.source or "system", overall)
    return ConditionReport(source=system.source, partition=partition, verdicts=verdicts, overall=overall)
