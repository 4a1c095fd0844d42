"""Command-line entry point: ``rofso-alloc <subcommand> --config PATH``.

Exit codes: 0 success, 2 configuration error, 3 I/O error,
4 invalid input or invariant violation, 5 numerical failure.
"""
import argparse
import dataclasses
import logging
import sys

from . import config as config_mod
from .experiment import emit_plot_script, format_report, run_experiment

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INVALID = 4
EXIT_NUMERIC = 5

COMMANDS = {"run-sdg": "sdg", "run-pddl": "pddl", "run-baseline": "baseline", "compare": "all"}


def build_parser():
    parser = argparse.ArgumentParser(prog="rofso-alloc",
                                     description="WDM power allocation for RoFSO links")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, which in COMMANDS.items():
        p = sub.add_parser(name, help=f"run {which} and write CSVs and a report")
        p.add_argument("--config", required=True,
                       help=f"config file, or a bundled name: {', '.join(config_mod.BUNDLED)}")
        p.add_argument("--seed", type=int, help="override the experiment seed")
        p.add_argument("--out", help="output directory (default: from config)")
        p.add_argument("--iters", type=int, help="override solver iteration counts")
        p.add_argument("--parallel", action="store_true",
                       help="run independent solvers concurrently")
    p = sub.add_parser("plot-script", help="write a plotting script for a finished run")
    p.add_argument("--out", required=True, help="directory of a finished run")
    p.add_argument("--config", help="unused; accepted for symmetry")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def apply_overrides(cfg, seed=None, iters=None):
    if seed is not None:
        cfg.seed = seed
    if iters is not None:
        if iters < 1:
            raise config_mod.ConfigError("--iters", "must be >= 1")
        cfg.sdg = dataclasses.replace(cfg.sdg, iterations=iters,
                                      window=min(cfg.sdg.window, iters))
        cfg.pddl = dataclasses.replace(cfg.pddl, iterations=iters,
                                       window=min(cfg.pddl.window, iters))
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot-script":
            path = emit_plot_script(args.out)
            print(path)
            return 0
        cfg = apply_overrides(config_mod.load(args.config), args.seed, args.iters)
        report = run_experiment(cfg, COMMANDS[args.command], args.out, args.parallel)
        sys.stdout.write(format_report(report))
        return 0
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FloatingPointError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, IndexError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
