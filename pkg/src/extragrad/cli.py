"""Command-line entry point.

Subcommands:
  run <config.json>      run the solver grid described by the config
  validate <config.json> check a config and report all violations
  list-problems          show the problem families and their parameters

Exit codes: 0 success, 1 config error, 2 run failure.
"""

from __future__ import annotations

import argparse
import sys

from .core import ConfigError
from .harness import PROBLEM_FAMILIES, parse_config, run_experiment


def _print_config_errors(exc: ConfigError) -> None:
    violations = exc.args[0] if exc.args and isinstance(exc.args[0], list) else [str(exc)]
    for v in violations:
        print(f"config error: {v}", file=sys.stderr)


def cli_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="extragrad",
        description="Benchmark harness for parameter-free extragradient VI solvers.")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")

    p_val = sub.add_parser("validate", help="validate an experiment config")
    p_val.add_argument("config", help="path to a JSON experiment config")

    sub.add_parser("list-problems", help="list problem families")

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1

    if args.command == "list-problems":
        for family, (signature, stop) in PROBLEM_FAMILIES.items():
            print(f"{family}({signature})  [stop metric: {stop}]")
        return 0

    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        _print_config_errors(exc)
        return 1

    if args.command == "validate":
        print(f"{args.config}: ok "
              f"({config.family}, {len(config.solvers)} solver(s), out_dir={config.out_dir})")
        return 0

    rows = run_experiment(config)
    failed = 0
    for row in rows:
        status = row["status"]
        detail = f" [{row['error']}]" if "error" in row else ""
        print(f"{row['problem']} / {row['solver']}: {status}{detail}")
        if status not in ("TOL_REACHED", "MAX_ITER", "STATIONARY_POINT"):
            failed += 1
    print(f"summary written to {config.out_dir / 'summary.csv'}")
    return 2 if failed else 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
