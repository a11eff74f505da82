"""Reproducible experiment runner.

Subcommands map one-to-one onto the verification suites; `run --suite NAME`
is the generic spelling. Exit codes: 0 all verdicts pass, 1 test failure,
2 usage/config error, 3 numerical abort.
"""

import argparse
import sys
from pathlib import Path

from .errors import (
    DriftnetError,
    HorizonExceeded,
    InvalidParams,
    KNearSingular,
    ParseError,
    SimulationBudgetExceeded,
)
from .suites import SUITE_NAMES, ExperimentConfig, parse_config, run_suite

_NUMERICAL = (KNearSingular, HorizonExceeded, SimulationBudgetExceeded)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--replicas", type=int, help="Monte Carlo replica count")
    p.add_argument("--out", type=Path, help="artifact directory")
    p.add_argument("--workers", type=int, help="worker processes (never affects results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUITE_NAMES:
        p = sub.add_parser(name, help=f"run the {name} suite")
        _add_common(p)
    p = sub.add_parser("run", help="run a suite chosen by --suite")
    p.add_argument("--suite", required=True, choices=SUITE_NAMES)
    _add_common(p)
    return parser


def _build_config(args) -> ExperimentConfig:
    suite = args.suite if args.command == "run" else args.command
    if args.config is not None:
        cfg = parse_config(args.config)
        if cfg.suite != suite:
            cfg.suite = suite
    else:
        cfg = ExperimentConfig(suite=suite)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicas is not None:
        if args.replicas < 1:
            raise InvalidParams("replicas must be >= 1")
        cfg.replicas = args.replicas
    if args.out is not None:
        cfg.output_dir = args.out
    if args.workers is not None:
        if args.workers < 1:
            raise InvalidParams("workers must be >= 1")
        cfg.workers = args.workers
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
    except (ParseError, InvalidParams) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_suite(cfg)
    except _NUMERICAL as exc:
        print(f"numerical abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DriftnetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for rep in result.reports:
        print(rep.line())
    n_fail = sum(not r.passed for r in result.reports)
    print(f"{result.suite}: {len(result.reports) - n_fail}/{len(result.reports)} passed")
    return 0 if result.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
