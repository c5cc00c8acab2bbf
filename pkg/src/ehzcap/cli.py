"""Command-line front end.

Exit codes: 0 success, 1 a checked bound failed, 2 bad input, 3 solver failure.
"""
import argparse
import sys
from dataclasses import replace

from . import bounds
from .capacity import SearchOptions
from .config import DEFAULT_TOLERANCES
from .errors import (
    DimensionError,
    DimensionMismatchError,
    PolytopeError,
    SchemaError,
    SolverError,
)
from .products import ProductPolytope, jk_product, kk_product, lagrangian_product
from .serialization import dumps, load_polytope, polytope_to_dict

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def _fmt(x):
    return f"{x:.12g}"


def _positive(cast):
    def parse(text):
        value = cast(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def _cap(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("support cap must be at least 2")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--support-cap", type=_cap, default=None)
    common.add_argument("--full-enumeration", action="store_true")
    common.add_argument("--tol-feas", type=_positive(float), default=None)
    common.add_argument("--tol-pos", type=_positive(float), default=None)
    common.add_argument("--jobs", type=_positive(int), default=1)
    common.add_argument("-o", "--output", default=None, help="write to PATH instead of stdout")

    parser = argparse.ArgumentParser(prog="ehzcap", description="EHZ capacities of convex polytopes")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("capacity", parents=[common], help="capacity with optimal certificate")
    p.add_argument("input")
    p = sub.add_parser("product", parents=[common], help="write a Lagrangian product polytope")
    p.add_argument("input")
    p.add_argument("second", nargs="?")
    p.add_argument("--kind", choices=("jk", "kk", "general"), default="kk")
    p = sub.add_parser("bounds", parents=[common], help="check every applicable bound")
    p.add_argument("input")
    p = sub.add_parser("viterbo", parents=[common], help="capacity-volume ratio")
    p.add_argument("input")
    return parser


def _options(args):
    tol = DEFAULT_TOLERANCES
    if args.tol_feas is not None:
        tol = replace(tol, feasibility=args.tol_feas)
    if args.tol_pos is not None:
        tol = replace(tol, positivity=args.tol_pos)
    return SearchOptions(
        support_cap=args.support_cap,
        full_enumeration=args.full_enumeration,
        tolerances=tol,
        jobs=args.jobs,
    )


def _emit(args, text):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_capacity(args):
    body = load_polytope(args.input)
    result = bounds.capacity_of(body, _options(args))
    if args.format == "json":
        _emit(args, dumps(result.to_dict()))
        return EXIT_OK
    best = result.best
    lines = [
        f"capacity\t{_fmt(result.value)}",
        f"q_value\t{_fmt(best.q_value)}",
        f"order\t{' '.join(str(i) for i in best.order)}",
        f"beta\t{' '.join(_fmt(b) for b in best.beta)}",
        f"strategy\t{result.strategy}",
        f"candidates_examined\t{result.candidates_examined}",
    ]
    lines += [f"warning\t{w}" for w in result.warnings]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_product(args):
    first = load_polytope(args.input)
    if isinstance(first, ProductPolytope):
        first = first.base
    if args.kind == "general":
        if args.second is None:
            raise SchemaError("--kind general needs a second input", "second")
        second = load_polytope(args.second)
        second = getattr(second, "base", second)
        product = lagrangian_product(first, second)
    elif args.second is not None:
        raise SchemaError(f"--kind {args.kind} takes a single input", "second")
    else:
        product = jk_product(first) if args.kind == "jk" else kk_product(first)
    text = dumps(polytope_to_dict(product))
    if args.format == "text" and not args.output:
        sys.stdout.write(text)
    else:
        _emit(args, text)
    return EXIT_OK


def cmd_bounds(args):
    body = load_polytope(args.input)
    if isinstance(body, ProductPolytope):
        body = body.base
    reports = bounds.full_report(body, _options(args))
    all_passed = all(r.passed for r in reports)
    if args.format == "json":
        _emit(args, dumps({"all_passed": all_passed, "reports": [r.to_dict() for r in reports]}))
    else:
        lines = ["name\tlhs\trhs\tslack\tstatus"]
        for r in reports:
            if isinstance(r, bounds.CheckError):
                lines.append(f"{r.name}\t-\t-\t-\tERROR {r.error_type}: {r.message}")
            else:
                status = "PASS" if r.passed else "FAIL"
                lines.append(f"{r.name}\t{_fmt(r.lhs)}\t{_fmt(r.rhs)}\t{_fmt(r.slack)}\t{status}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if all_passed else EXIT_FAILED


def cmd_viterbo(args):
    body = load_polytope(args.input)
    options = _options(args)
    ratio = bounds.viterbo_ratio(body, options)
    remark = None
    if isinstance(body, ProductPolytope) and body.kind == "jk" and body.factor_dim == 2:
        remark = bounds.SQRT2
    out = {
        "ratio": ratio,
        "capacity": bounds.capacity_of(body, options).value,
        "conjectured_threshold": 1.0,
        "remark_threshold": remark,
    }
    if args.format == "json":
        _emit(args, dumps(out))
    else:
        lines = [f"ratio\t{_fmt(ratio)}", f"capacity\t{_fmt(out['capacity'])}", "conjectured_threshold\t1"]
        if remark is not None:
            lines.append(f"remark_threshold\t{_fmt(remark)}")
        _emit(args, "\n".join(lines) + "\n")
    if remark is not None and ratio > remark + DEFAULT_TOLERANCES.bound_slack:
        return EXIT_FAILED
    return EXIT_OK


COMMANDS = {
    "capacity": cmd_capacity,
    "product": cmd_product,
    "bounds": cmd_bounds,
    "viterbo": cmd_viterbo,
}


def main(argv=None):
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        # `product a.json --kind general b.json` puts the second factor after the option
        if args.command == "product" and args.second is None and len(extra) == 1 and not extra[0].startswith("-"):
            args.second, extra = extra[0], []
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (SchemaError, PolytopeError, DimensionMismatchError, DimensionError, OSError) as exc:
        field = getattr(exc, "field", None)
        where = f" (field: {field})" if field else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
