"""Command line front end.

    lf2hh check FILE
    lf2hh translate FILE [--mode M] [--simplify-top] [--proof-arg P] [-o OUT]
    lf2hh solve FILE --query Q [--mode M] [--depth D] [--all] [--no-verify]
    lf2hh bench NAME [--sizes LIST] [--mode M] [--depth D] [-o OUT]

Exit codes: 0 success; for check, 1 means the signature was rejected; for
solve, 2 means the search space was exhausted without an answer and 3 that
the step budget ran out (or the search ended with unresolved higher-order
constraints, which equally fails to establish underivability).  Bad
command lines exit 64, unreadable files 66.  The LF2HH_DEPTH environment
variable sets the default step budget; --depth overrides it.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import bench as benchmod
from . import pipeline
from .engine import default_budget
from .lfsyntax import to_str
from .parser import ParseError
from .printer import print_program
from .translate import TranslateOptions

EX_USAGE = 64
EX_NOINPUT = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        print(f"lf2hh: cannot read {path}: {e.strerror or e}", file=sys.stderr)
        raise SystemExit(EX_NOINPUT)


def _load(path: str) -> pipeline.LoadedSignature:
    text = _read_file(path)
    try:
        return pipeline.load_signature(text, path)
    except ParseError as e:
        print(f"lf2hh: {e}", file=sys.stderr)
        raise SystemExit(1)


def _options(args: argparse.Namespace) -> TranslateOptions:
    return TranslateOptions(
        mode=args.mode,
        proof_arg_position=getattr(args, "proof_arg", "first"),
        simplify_top=getattr(args, "simplify_top", False),
    )


def cmd_check(args: argparse.Namespace) -> int:
    loaded = _load(args.file)
    if loaded.ok:
        print(f"{args.file}: ok ({len(loaded.raw)} declarations)")
        return 0
    f = loaded.report.failure
    print(f"{args.file}: rejected at rule {f.rule}: {f.detail}", file=sys.stderr)
    return 1


def cmd_translate(args: argparse.Namespace) -> int:
    loaded = _load(args.file)
    if not loaded.ok:
        f = loaded.report.failure
        print(f"lf2hh: {args.file} does not check ({f.rule}: {f.detail})", file=sys.stderr)
        return 1
    text = print_program(pipeline.translate(loaded, _options(args)))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    loaded = _load(args.file)
    if not loaded.ok:
        f = loaded.report.failure
        print(f"lf2hh: {args.file} does not check ({f.rule}: {f.detail})", file=sys.stderr)
        return 1
    try:
        query = pipeline.prepare_query(loaded, args.query)
    except (ParseError, pipeline.PipelineError) as e:
        print(f"lf2hh: bad query: {e}", file=sys.stderr)
        return 1
    verify = not args.no_verify
    out = pipeline.solve_query(
        loaded,
        query,
        _options(args),
        budget=args.depth,
        max_answers=None if args.all else 1,
        verify=verify,
        until_verified=verify and not args.all,
    )
    for i, r in enumerate(out.results, 1):
        label = f"answer {i}: " if args.all else "witness: "
        if r.decoded is not None:
            print(f"{label}{to_str(r.decoded)}")
        else:
            print(f"{label}<undecodable: {r.decode_error}>")
        if verify:
            if r.verified:
                print("verified: yes")
            elif r.report is not None:
                f = r.report.failure
                print(f"verified: NO ({f.rule}: {f.detail})")
            else:
                print("verified: NO (witness did not decode)")
    s = out.stats
    print(f"steps: {s.backchain_steps}  unify: {s.unify_calls}", file=sys.stderr)

    succeeded = out.any_verified if verify else bool(out.results)
    if succeeded:
        return 0
    if out.results:
        # answers were found but none survived verification
        print("lf2hh: no answer verified", file=sys.stderr)
        return 2
    if out.status == "failed":
        print("lf2hh: no proof found (search space exhausted)", file=sys.stderr)
        return 2
    if out.status == "budget":
        print(f"lf2hh: no proof within the step budget ({out.detail})", file=sys.stderr)
        return 3
    print(
        "lf2hh: search ended with unresolved higher-order constraints; "
        "underivability not established",
        file=sys.stderr,
    )
    return 3


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        sizes = tuple(int(s) for s in args.sizes.split(",") if s.strip())
    except ValueError:
        print("lf2hh: --sizes expects a comma separated list of integers", file=sys.stderr)
        return EX_USAGE
    if not sizes or any(n < 1 for n in sizes):
        print("lf2hh: --sizes expects positive integers", file=sys.stderr)
        return EX_USAGE
    rows = benchmod.run_bench(args.name, sizes, args.mode, budget=args.depth)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            benchmod.write_csv(rows, fh)
    else:
        benchmod.write_csv(rows, sys.stdout)
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="lf2hh", description="Type check, translate, and run LF signatures")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[], help="parse and check a signature")
    c.add_argument("file")
    c.set_defaults(fn=cmd_check)

    t = sub.add_parser("translate", help="print the logic program for a signature")
    t.add_argument("file")
    t.add_argument("--mode", choices=("simple", "optimized"), default="simple")
    t.add_argument("--simplify-top", action="store_true", help="drop every true => premise")
    t.add_argument(
        "--proof-arg",
        choices=("first", "last"),
        default="first",
        help="where specialized predicates put the proof term argument",
    )
    t.add_argument("-o", "--output", metavar="OUT")
    t.set_defaults(fn=cmd_translate)

    s = sub.add_parser("solve", help="search for an inhabitant of a query type")
    s.add_argument("file")
    s.add_argument("--query", required=True, metavar="Q", help="a type over the signature")
    s.add_argument("--mode", choices=("simple", "optimized"), default="optimized")
    s.add_argument(
        "--depth",
        type=int,
        default=None,
        metavar="D",
        help=f"backchain step budget (default {default_budget()}, env LF2HH_DEPTH)",
    )
    s.add_argument("--all", action="store_true", help="enumerate every answer")
    s.add_argument("--no-verify", action="store_true", help="skip checking decoded witnesses")
    s.set_defaults(fn=cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark family, print CSV")
    b.add_argument("name", choices=benchmod.BENCHES)
    b.add_argument("--sizes", default=",".join(str(n) for n in benchmod.DEFAULT_SIZES))
    b.add_argument("--mode", choices=("simple", "optimized"), default="optimized")
    b.add_argument("--depth", type=int, default=None, metavar="D")
    b.add_argument("-o", "--output", metavar="OUT")
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except pipeline.PipelineError as e:
        print(f"lf2hh: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
