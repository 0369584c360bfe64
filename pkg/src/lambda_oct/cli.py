"""Command-line entry point: ``lambda-oct run`` and ``lambda-oct compare``."""
from __future__ import annotations

import argparse
import logging
import sys

from .runner import (OUTPUT_ENV, ConfigError, compare_methods, execute_run,
                     load_config)


def _overrides(args) -> dict:
    changes = {}
    if args.grid is not None:
        changes["num_steps"] = args.grid
    if args.max_iter is not None:
        changes["max_iterations"] = args.max_iter
    if args.gamma is not None:
        changes["gamma"] = args.gamma
    return changes


def _load(paths, changes):
    configs = []
    for path in paths:
        cfg = load_config(path)
        configs.append(cfg.replace(**changes) if changes else cfg)
    return configs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-oct",
        description="Optimal control of population transfer and coherence in a "
                    "three-level Lambda system.",
        epilog=f"Default output directory: ${OUTPUT_ENV}, else ./runs.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="more logging (repeat for debug output)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--grid", type=int, metavar="N", help="override num_steps")
    common.add_argument("--max-iter", type=int, metavar="K",
                        help="override max_iterations")
    common.add_argument("--gamma", type=float, metavar="X",
                        help="override the convergence threshold")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="optimize one configuration")
    run.add_argument("config", help="key = value configuration file")

    cmp_ = sub.add_parser("compare", parents=[common],
                          help="run several configurations and print a table")
    cmp_.add_argument("configs", nargs="+", help="configuration files")
    cmp_.add_argument("--workers", type=int, default=1,
                      help="parallel worker processes (default 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            (cfg,) = _load([args.config], _overrides(args))
            _, summary = execute_run(cfg, args.out)
            for key, value in summary.items():
                print(f"{key} = {value}")
            return 0 if summary.get("converged") else 1
        configs = _load(args.configs, _overrides(args))
        table, summaries = compare_methods(configs, args.out, args.workers)
        print(table, end="")
        return 0 if all(s.get("converged") for s in summaries) else 1
    except (ConfigError, OSError, ValueError) as exc:
        print(f"lambda-oct: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
