"""Command line entry point: ``decohere <task> --config <file> [--out DIR] [--workers N] [--seed S]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import TASKS, ConfigError, load_config
from .interference import GridResolutionError
from .tasks import TaskError, run_task

log = logging.getLogger("decohere")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decohere", description=__doc__)
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides [output].directory)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for sweep points")
    parser.add_argument("--seed", type=int, default=None, help="Monte Carlo seed (overrides the config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"decohere {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.workers < 1:
        print("decohere: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        config = load_config(args.config, args.task)
        written = run_task(config, args.out, args.workers, args.seed)
    except (ConfigError, TaskError) as exc:
        print(f"decohere: {exc}", file=sys.stderr)
        return 2
    except GridResolutionError as exc:
        print(f"decohere: {exc} (increase task.screen_points or reduce task.screen_periods)", file=sys.stderr)
        return 2
    for name, path in written.items():
        log.info("%s: %s", name, path)
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
