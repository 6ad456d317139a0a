"""Command line entry point.

Exit codes: 0 success, 1 validation failure, 2 runtime or precondition
failure, 3 suite failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import linalg as la
from .errors import DimensionError, ObjectifyError, PreconditionError, ValidationError
from .report import resolve_seed, run
from .scenario import bundled_names, bundled_text, load_scenario
from .suite import run_suite

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_SUITE = 0, 1, 2, 3


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not dims or any(d < 2 for d in dims):
        raise argparse.ArgumentTypeError("dimensions must be integers >= 2")
    return dims


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="objectify", description="Work, heat and heat fluctuations of quantum measurements.")
    p.add_argument("--tol", type=float, default=la.ATOL, help="validation and precondition tolerance (default %(default)g)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="load and validate a scenario file")
    v.add_argument("file")

    r = sub.add_parser("run", help="run a scenario and emit a JSON report")
    r.add_argument("file")
    r.add_argument("--alpha", type=float, action="append", help="skew-information parameter; repeatable")
    r.add_argument("--seed", type=int, default=None, help="overrides the scenario seed and OBJECTIFY_SEED")
    r.add_argument("--out", help="write the JSON report here instead of stdout")
    r.add_argument("--csv", help="also write per-outcome records as CSV")
    r.add_argument("--timing", action="store_true", help="include wall-clock timing (breaks byte-identical output)")

    s = sub.add_parser("suite", help="run the randomised invariant suite")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--dims", type=_dims, default=(2, 3, 4), help="comma-separated dimensions (default 2,3,4)")
    s.add_argument("--json", action="store_true", help="emit the summary as JSON")

    e = sub.add_parser("example", help="print a bundled scenario (use 'list' to see names)")
    e.add_argument("name")
    return p


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            sc = load_scenario(args.file, args.tol)
            print(f"ok: {args.file} ({sc.system_dim}x{sc.apparatus_dim}, {len(sc.scheme.outcomes)} outcomes, digest {sc.digest[:12]})")
            return EXIT_OK
        if args.command == "run":
            sc = load_scenario(args.file, args.tol)
            rep = run(sc, args.alpha, args.seed, args.tol, timing=args.timing)
            text = rep.to_json() + "\n"
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            if args.csv:
                Path(args.csv).write_text(rep.to_csv())
            return EXIT_OK
        if args.command == "suite":
            res = run_suite(resolve_seed(args.seed), args.dims)
            sys.stdout.write(res.to_json() + "\n" if args.json else res.summary())
            return EXIT_OK if res.ok else EXIT_SUITE
        if args.command == "example":
            if args.name == "list":
                print("\n".join(bundled_names()))
            else:
                sys.stdout.write(bundled_text(args.name))
            return EXIT_OK
    except (ValidationError, DimensionError) as exc:
        return _fail(EXIT_INVALID, str(exc))
    except PreconditionError as exc:
        return _fail(EXIT_RUNTIME, str(exc))
    except ObjectifyError as exc:
        return _fail(EXIT_RUNTIME, str(exc))
    except (ValueError, ArithmeticError) as exc:
        return _fail(EXIT_RUNTIME, f"{type(exc).__name__}: {exc}")
    return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
