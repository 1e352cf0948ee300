"""Command-line front-end: ``opfbalance resample`` and ``opfbalance evaluate``.

Exit codes: 0 ok, 1 runtime error, 2 usage error.  Output files are written
atomically; with default flags every output is byte-reproducible from the
input file and the flag set (timing columns are opt-in via --timings).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dataset import impute_mean, load_csv, split_validation, standard_scale, write_csv, _atomic_write_text
from .evaluation import (
    DEFAULT_KMAX_GRID,
    METHOD_NAMES,
    report_csv,
    report_text,
    resolve_method,
    run_experiment,
    significance_vs_best,
)
from .rng import Rng

_NEEDS_SCORES = ("opf-us", "opf-us1", "opf-us2", "opf-us3", "us1-o2pf", "us2-o2pf", "us3-o2pf")


def _parse_grid(text: str):
    try:
        grid = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid k_max grid {text!r}") from None
    if not grid or any(g < 1 for g in grid):
        raise argparse.ArgumentTypeError(f"invalid k_max grid {text!r}")
    return grid


def _label_column(value):
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opfbalance",
        description="Optimum-path forest resampling and evaluation for imbalanced CSV datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rs = sub.add_parser("resample", help="resample one dataset file and write the result")
    rs.add_argument("--input", required=True, help="input CSV (header row, one label column)")
    rs.add_argument("--output", required=True, help="output CSV path")
    rs.add_argument("--method", required=True, choices=METHOD_NAMES)
    rs.add_argument("--seed", required=True, type=int, help="seed (required: no silent nondeterminism)")
    rs.add_argument("--kmax-grid", type=_parse_grid, default=DEFAULT_KMAX_GRID,
                    help="comma list; resample uses its first value as k_max")
    rs.add_argument("--label-column", default=None, help="label column name or index (default: last)")
    rs.add_argument("--val-fraction", type=float, default=0.15,
                    help="internal validation slice for score-based methods")

    ev = sub.add_parser("evaluate", help="run the repeated-holdout evaluation protocol")
    ev.add_argument("--input", required=True)
    ev.add_argument("--methods", default="all",
                    help="comma list of methods, or 'all' (original is always included)")
    ev.add_argument("--runs", type=int, default=20)
    ev.add_argument("--seed", type=int, default=0, help="base seed for the run streams")
    ev.add_argument("--kmax-grid", type=_parse_grid, default=DEFAULT_KMAX_GRID)
    ev.add_argument("--label-column", default=None)
    ev.add_argument("--val-fraction", type=float, default=0.15)
    ev.add_argument("--fit-scaler-on-train", action="store_true",
                    help="leak-free alternative: fit the scaler on each run's training split")
    ev.add_argument("--report", default=None, help="path prefix for <prefix>.report.txt / <prefix>.runs.csv")
    ev.add_argument("--timings", action="store_true",
                    help="include measured per-run seconds in the report files (not byte-reproducible)")
    return parser


def _counts(ds):
    c0, c1 = ds.class_counts()
    return f"{c0}/{c1}"


def _cmd_resample(args) -> int:
    if args.input == args.output:
        raise UsageError("--input and --output must be distinct paths")
    ds = load_csv(args.input, label_column=_label_column(args.label_column))

    if args.method == "original":
        write_csv(ds, args.output)
        print(f"resample method=original seed={args.seed} before={_counts(ds)} "
              f"after={_counts(ds)} rows={ds.n} output={args.output}")
        return 0

    prepared = impute_mean(ds)
    prepared = standard_scale(prepared, prepared)
    rng = Rng(args.seed)

    if args.method in _NEEDS_SCORES:
        material, val = split_validation(prepared, args.val_fraction, rng.child(1))
    else:
        material, val = prepared, None

    method = resolve_method(args.method, args.kmax_grid)
    k = args.kmax_grid[0] if method.tune_grid else None
    out = method.resample(material, val, k, rng.child(2), None)

    synthetic = ~np.isin(out.ids, material.ids)
    write_csv(out, args.output, synthetic_mask=synthetic)
    print(f"resample method={args.method} seed={args.seed} before={_counts(ds)} "
          f"after={_counts(out)} rows={ds.n}->{out.n} output={args.output}")
    return 0


def _cmd_evaluate(args) -> int:
    ds = load_csv(args.input, label_column=_label_column(args.label_column))
    if args.methods.strip().lower() == "all":
        methods = list(METHOD_NAMES)
    else:
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        unknown = [m for m in methods if m not in METHOD_NAMES]
        if unknown:
            raise UsageError(f"unknown method(s) {unknown}; choose from {', '.join(METHOD_NAMES)}")

    flag_echo = (
        f"input={args.input} methods={','.join(methods)} runs={args.runs} seed={args.seed} "
        f"kmax-grid={','.join(map(str, args.kmax_grid))} label-column={args.label_column} "
        f"val-fraction={args.val_fraction} fit-scaler-on-train={args.fit_scaler_on_train}"
    )
    report = run_experiment(
        ds, methods, args.runs, args.seed,
        kmax_grid=args.kmax_grid,
        val_fraction=args.val_fraction,
        fit_scaler_on_train=args.fit_scaler_on_train,
        dataset_name=args.input,
        flags=flag_echo,
    )

    if args.report:
        _atomic_write_text(f"{args.report}.report.txt", report_text(report, include_timings=args.timings))
        _atomic_write_text(f"{args.report}.runs.csv", report_csv(report, include_timings=args.timings))

    marks = significance_vs_best(report)
    print(f"evaluate {flag_echo}")
    print("method               mean      std    ")
    for name in report.methods:
        star = " *" if marks[name] else ""
        print(f"{name:<20} {report.mean(name):.4f}  {report.std(name):.4f}{star}")
    print("(* = best mean or statistically similar to it, Wilcoxon signed-rank, alpha=0.05)")
    if args.report:
        print(f"report files: {args.report}.report.txt {args.report}.runs.csv")
    return 0


class UsageError(Exception):
    pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "resample":
            return _cmd_resample(args)
        return _cmd_evaluate(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: diagnostic, no partial output
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
