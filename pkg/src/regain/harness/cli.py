"""Run, check and replay the regaining constructions from the command line.

Exit codes: 0 when every check passes, 2 on an invariant violation, 1 on a
usage or I/O error. ``REGAIN_HORIZON`` overrides the default horizon (an
explicit ``--horizon`` still wins).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from ..approximations import index_compress, transform_1_to_3, transform_4_to_1, witnesses
from ..enumerations import (
    RateFunction,
    affine_embed,
    enum_prefix,
    good_upgrade,
    interleave,
    intersect,
    intersection_gadget,
    without_repetitions,
)
from ..errors import RegainError
from ..formats import dump_approx, dump_enum, load_approx, load_enum, read_text
from ..foundation import Dyadic
from .experiments import oracle_compare, random_instance, run_experiment, verify_trace
from .trace import Trace

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2

DEFAULT_HORIZONS = {
    "enum": 100,
    "approx": 256,
    "diag": 10_000,
    "degree": 2_000,
    "omega": 512,
    "split": 10_000,
    "gadget": 1_000,
    "oracle": 200,
    "verify": 0,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are exit code 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _rate(text: str) -> RateFunction:
    """``id`` or ``A,B`` for ``n -> A*n + B``."""
    if text == "id":
        return RateFunction.identity()
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"rate must be 'id' or 'A,B', got {text!r}") from None
    return RateFunction.linear(a, b)


def _global_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS lets the flags appear before or after the subcommand without clobbering each other
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--horizon", type=int, default=argparse.SUPPRESS, help="number of stages")
    common.add_argument("--trace-out", default=argparse.SUPPRESS, help="write the run trace here")
    common.add_argument("--format", choices=("text", "binary"), default=argparse.SUPPRESS, help="trace encoding")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="regain", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enum", parents=[common], help="enumeration combinators on ENUM files")
    p.add_argument("op", choices=("prefix", "dedup", "interleave", "intersect", "affine", "gadget", "upgrade"))
    p.add_argument("--input", required=True)
    p.add_argument("--other", help="second ENUM file for binary combinators")
    p.add_argument("--output", help="write the resulting ENUM file here")
    p.add_argument("--affine", type=int, nargs=2, metavar=("A", "B"), default=(2, 0))
    p.add_argument("--rate", type=_rate, default=RateFunction.identity(), help="rate for 'upgrade': id or A,B")

    p = sub.add_parser("approx", parents=[common], help="approximation transforms on APPROX files")
    p.add_argument("op", choices=("witnesses", "1to3", "4to1", "compress"))
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--limit", help="exact limit (dyadic) for witness detection")
    p.add_argument("--rate", type=_rate, default=RateFunction.identity(), help="rate function: id or A,B")

    p = sub.add_parser("diag", parents=[common], help="diagonalize against an interpreter family")
    p.add_argument("--family", help="interpreter family file (one expression per line)")
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--check", action="store_true", help="print every claim; exit 2 on violation")

    p = sub.add_parser("degree", parents=[common], help="degree-preserving re-enumeration")
    p.add_argument("--input", help="ENUM file of an injective function (default: seeded shuffle)")
    p.add_argument("--density", type=float, default=0.25)
    p.add_argument("--emit-table", action="store_true")
    p.add_argument("--check", action="store_true")

    p = sub.add_parser("omega", parents=[common], help="weighted partial sums over a toy machine")
    p.add_argument("--machine", help="machine file: '<program-bits> <output-bits>' per line")
    p.add_argument("--size", type=int, help="entries of the sampled machine (default 4..16)")
    p.add_argument("--check", action="store_true")

    p = sub.add_parser("split", parents=[common], help="split a stream, a c.e. set or a name")
    p.add_argument("--kind", choices=("stream", "ce", "delta", "gadget"), default="stream")
    p.add_argument("--input", help="ENUM (stream/ce/gadget) or DELTA (delta) file")
    p.add_argument("--bound", type=int, default=2, help="multiplicity bound of a sampled name")
    p.add_argument("--emit-table", action="store_true")
    p.add_argument("--check", action="store_true")

    p = sub.add_parser("verify", parents=[common], help="re-check a trace and replay it")
    p.add_argument("trace")

    p = sub.add_parser("oracle", parents=[common], help="compare implementations with reference oracles")
    p.add_argument("construction", choices=("enum_prefix", "split_stream", "degree", "omega", "witness"))
    p.add_argument("--count", type=int, default=100)
    return parser


def _horizon(args, command: str) -> int:
    if hasattr(args, "horizon"):
        return args.horizon
    env = os.environ.get("REGAIN_HORIZON")
    if env:
        try:
            return int(env)
        except ValueError:
            raise RegainError(f"REGAIN_HORIZON={env!r} is not an integer") from None
    return DEFAULT_HORIZONS[command]


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_enum(args, horizon: int) -> int:
    f = load_enum(read_text(args.input))
    other = load_enum(read_text(args.other)) if args.other else None
    if args.op in ("interleave", "intersect", "gadget") and other is None:
        raise RegainError(f"'{args.op}' needs --other")
    if args.op == "prefix":
        print(" ".join(map(str, sorted(enum_prefix(f, horizon)))))
        return EXIT_OK
    out = {
        "dedup": lambda: without_repetitions(f),
        "interleave": lambda: interleave(f, other),
        "intersect": lambda: intersect(f, other),
        "affine": lambda: affine_embed(f, *args.affine),
        "gadget": lambda: intersection_gadget(f, other).recovered,
        "upgrade": lambda: good_upgrade(f, args.rate),
    }[args.op]()
    _emit(dump_enum(out, horizon), args.output)
    return EXIT_OK


def _cmd_approx(args, horizon: int) -> int:
    a = load_approx(read_text(args.input))
    if args.op == "witnesses":
        limit = Dyadic.parse(args.limit) if args.limit else None
        _emit(witnesses(a, limit, horizon).to_text() + "\n", args.output)
        return EXIT_OK
    out = {
        "1to3": lambda: transform_1_to_3(a, args.rate),
        "4to1": lambda: transform_4_to_1(a, args.rate),
        "compress": lambda: index_compress(a, args.rate),
    }[args.op]()
    _emit(dump_approx(out, horizon), args.output)
    return EXIT_OK


def _experiment(args, command: str, horizon: int) -> int:
    params: dict = {}
    construction = command
    if command == "diag":
        params = {"family": args.family, "n_max": args.n_max}
    elif command == "degree":
        params = {"input": args.input, "density": args.density, "emit_table": args.emit_table}
    elif command == "omega":
        params = {"machine": args.machine, "size": args.size}
    elif command == "split":
        if args.kind == "gadget":
            construction, params = "gadget", {"input": args.input}
        else:
            params = {"kind": args.kind, "input": args.input, "bound": args.bound, "emit_table": args.emit_table}
    params = {k: v for k, v in params.items() if v not in (None, False)}
    config = {"construction": construction, "seed": getattr(args, "seed", 0), "horizon": horizon, "params": params}
    trace = run_experiment(config)
    if hasattr(args, "trace_out"):
        trace.save(args.trace_out, getattr(args, "format", "text"))
    failures = trace.failures()
    verdict = "pass" if not failures else "FAIL"
    print(f"{construction} run_id={trace.run_id} horizon={horizon} records={len(trace.stages)} verdict={verdict}")
    if args.check:
        for line in trace.report:
            print(line.to_line())
        return EXIT_VIOLATION if failures else EXIT_OK
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_trace(Trace.load(args.trace))
    for line in report.report:
        print(line.to_line())
    print("verdict=" + ("pass" if report.passed else "FAIL"))
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _cmd_oracle(args, horizon: int) -> int:
    rng = random.Random(getattr(args, "seed", 0))
    mismatches = []
    for k in range(args.count):
        result = oracle_compare(random_instance(args.construction, rng, horizon), args.construction)
        if not result["equal"]:
            mismatches.append({"instance": k, "detail": result["detail"]})
    print(json.dumps({"construction": args.construction, "instances": args.count, "mismatches": mismatches}))
    return EXIT_VIOLATION if mismatches else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        horizon = _horizon(args, args.command)
        if horizon < 0:
            raise RegainError("--horizon must be a natural number")
        if args.command == "enum":
            return _cmd_enum(args, horizon)
        if args.command == "approx":
            return _cmd_approx(args, horizon)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "oracle":
            return _cmd_oracle(args, horizon)
        return _experiment(args, args.command, horizon)
    except (RegainError, ValueError, OSError) as exc:
        print(f"regain: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
