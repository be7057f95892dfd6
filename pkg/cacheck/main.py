import argparse
import logging
import os
import sys

from .conditions import full_report
from .errors import CacError, OutOfFuel, TypingError
from .reduction import normalize
from .syntax import load_system, parse_env, parse_term
from .typecheck import TypeChecker, check
from .utils import ASSUMPTIONS, Outcome, load_config, setup_logging
from .witness import run_witnesses

logger = logging.getLogger(__name__)

CORPUS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")

EXIT_CODES = {Outcome.HOLDS: 0, Outcome.FAILS: 1, Outcome.ASSUMED: 2, Outcome.UNDECIDED: 2}


def resolve_path(path):
    """A path on disk, else the bundled example of that name."""
    if os.path.exists(path):
        return path
    bundled = os.path.join(CORPUS_DIR, path)
    if os.path.exists(bundled):
        return bundled
    return path


def load(path):
    path = resolve_path(path)
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return load_system(text, path)


def parse_partition(text):
    """'f1=a,b,fw=c,d' -> {'f1': ['a', 'b'], 'fw': ['c', 'd']}"""
    groups, current = {}, None
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" in item:
            current, item = (s.strip() for s in item.split("=", 1))
            if current not in ("f1", "fw"):
                raise ValueError(f"partition groups are f1 and fw, got {current!r}")
            groups.setdefault(current, [])
        if current is None:
            raise ValueError(f"partition must start with f1= or fw=, got {text!r}")
        if item:
            groups[current].append(item)
    return groups


def test(name="corpus.cac", **overrides):
    report = full_report(load(name), load_config(overrides))
    print(report.render())
    return report


def test_all():
    for name in sorted(os.listdir(CORPUS_DIR)):
        if name.endswith(".cac"):
            report = full_report(load(name), load_config())
            print(f"{name}: {report.overall}")


def _report(args, config):
    report = full_report(load(args.file), config)
    as_json = args.json or args.command == "report"
    print(report.model_dump_json(indent=2) if as_json else report.render())
    return report.exit_code(config.strict)


def _typecheck(args, config):
    system = load(args.file)
    env = parse_env(system, args.env or "")
    checker = TypeChecker(system.signature, system.rewrite_system, config.fuel)
    try:
        checker.check_env(env)
        t = parse_term(system, args.term, env)
        if args.type is None:
            print(checker.infer(env, t))
            return 0
    except TypingError as e:
        print(f"fails: {e}")
        return 1
    T = parse_term(system, args.type, env)
    verdict = check(system.signature, env, t, T, system.rewrite_system, config.fuel)
    print(verdict)
    return EXIT_CODES[verdict.outcome]


def _normalize(args, config):
    system = load(args.file)
    t = parse_term(system, args.term)
    trace = [] if args.trace else None
    try:
        nf = normalize(system.rewrite_system, t, config.fuel, strategy=args.strategy, trace=trace)
    except OutOfFuel as e:
        for step in trace or ():
            print(step)
        print(f"undecided: no normal form within {e.fuel} steps")
        return 2
    for step in trace or ():
        print(step)
    print(nf)
    return 0


def _witness(args, config):
    system = load(args.file)
    report = run_witnesses(system, args.count, args.seed, args.max_size, config.fuel, progress=not args.quiet)
    print(report.render())
    return 0 if report.passed else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="A .cac file, or the name of a bundled example.")
    common.add_argument("--fuel", type=int, help="Maximum number of contractions per normalization.")
    common.add_argument("--assume", action="append", choices=ASSUMPTIONS, default=[],
                        help="Accept an undecidable condition as an assumption.")
    common.add_argument("--partition", type=parse_partition, help="First-order/higher-order split, e.g. f1=a,b,fw=c.")
    common.add_argument("--strict", action="store_true", help="Treat assumed conditions as failures.")
    common.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable).")

    parser = argparse.ArgumentParser(prog="cac", description="Type checking and termination conditions for "
                                     "the calculus of algebraic constructions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="Check every condition and print a report.")
    p.add_argument("--json", action="store_true", help="Print the report as JSON.")
    p.set_defaults(func=_report)

    p = sub.add_parser("report", parents=[common], help="Print the JSON condition report.")
    p.add_argument("--json", action="store_true", help="Accepted for symmetry with check.")
    p.set_defaults(func=_report)

    p = sub.add_parser("typecheck", parents=[common], help="Infer or check the type of a term.")
    p.add_argument("-e", "--term", required=True, help="Term to type.")
    p.add_argument("-t", "--type", help="Expected type.")
    p.add_argument("-g", "--env", help="Environment for open terms, e.g. \"x : nat, y : nat\".")
    p.set_defaults(func=_typecheck)

    p = sub.add_parser("normalize", parents=[common], help="Print the normal form of a term.")
    p.add_argument("-e", "--term", required=True, help="Term to normalize.")
    p.add_argument("--strategy", choices=["innermost", "outermost"], default="innermost")
    p.add_argument("--trace", action="store_true", help="Print every contraction.")
    p.set_defaults(func=_normalize)

    p = sub.add_parser("witness", parents=[common], help="Random subject-reduction and confluence witnesses.")
    p.add_argument("-n", "--count", type=int, default=200, help="Number of random terms.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=30)
    p.add_argument("-q", "--quiet", action="store_true", help="No progress bar.")
    p.set_defaults(func=_witness)
    return parser


def cli(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    try:
        config = load_config({"fuel": args.fuel, "assume": args.assume, "strict": args.strict,
                              "partition": args.partition})
        return args.func(args, config)
    except (CacError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(cli())
    # test()
    # test("mendler.cac")
    # test_all()
