"""Command line entry point: ``rootflow run | quantile | levy``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 threshold failure (``run --check`` only).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, NumericalFailure
from .measures import levy_distance, measure_from_json

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_THRESHOLD = 0, 2, 3, 4


def _measure_arg(text: str):
    path = Path(text)
    try:
        doc = json.loads(path.read_text()) if path.is_file() else json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--measure is neither a JSON file nor a JSON document: {exc}") from None
    try:
        return measure_from_json(doc)
    except (DomainError, TypeError, AttributeError, KeyError) as exc:
        raise ConfigError(f"bad measure document: {exc}") from None


def _cmd_run(args) -> int:
    from .harness import load_config, run_experiment

    report = run_experiment(load_config(args.config))
    for c in report.checks:
        op = ">=" if c.at_least else "<="
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value!r} {op} {c.limit!r}")
    print(f"{report.experiment}: {'passed' if report.passed else 'failed'} ({len(report.checks)} checks)")
    if args.check and not report.passed:
        return EXIT_THRESHOLD
    return EXIT_OK


def _cmd_quantile(args) -> int:
    from .prediction import LimitLaw, limit_quantile

    if not 0.0 <= args.t < 1.0:
        raise ConfigError("--t must lie in [0, 1)")
    if args.grid < 1:
        raise ConfigError("--grid must be a positive integer")
    law = LimitLaw(_measure_arg(args.measure), args.t)
    x = (1.0 - args.t) * np.arange(args.grid + 1) / args.grid
    q = limit_quantile(law, x)
    print("x,quantile")
    for a, b in zip(x, q):
        print(f"{float(a)!r},{float(b)!r}")
    return EXIT_OK


def _cmd_levy(args) -> int:
    from .io import read_numeric_column

    print(repr(levy_distance(read_numeric_column(args.csv_a), read_numeric_column(args.csv_b))))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on usage errors, which is already the config code
    parser = argparse.ArgumentParser(prog="rootflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config", help="path to the experiment config")
    run.add_argument("--check", action="store_true", help="exit 4 if any threshold fails")
    run.set_defaults(func=_cmd_run)

    qu = sub.add_parser("quantile", help="print the limit quantile function on a grid")
    qu.add_argument("--measure", required=True, help="measure document or path to one")
    qu.add_argument("--t", type=float, required=True, help="fraction of the degree differentiated away")
    qu.add_argument("--grid", type=int, required=True, help="number of grid intervals on [0, 1 - t]")
    qu.set_defaults(func=_cmd_quantile)

    lv = sub.add_parser("levy", help="Levy distance between two samples stored as CSV")
    lv.add_argument("csv_a")
    lv.add_argument("csv_b")
    lv.set_defaults(func=_cmd_levy)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
