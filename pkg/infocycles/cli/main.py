"""
Command-line entry point.

Usage:
  python run_infocycles.py solve --config configs/benchmark.cfg --out out/
  python run_infocycles.py simulate --config configs/benchmark.cfg --out out/ --seed 7
  python run_infocycles.py sweep --config configs/benchmark.cfg --set run.lambdas=[0.1,1,5]

Exit codes: 0 success, 2 configuration error, 3 solver did not converge,
4 missing upstream artifact.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from tabulate import tabulate

from infocycles import __version__
from infocycles.cli import commands  # noqa: F401  registers the subcommands
from infocycles.cli.config import load_config
from infocycles.cli.registry import COMMANDS, Command, producer_of
from infocycles.model.errors import ConfigError, DomainError, MissingArtifactError, ModelError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_MISSING_ARTIFACT = 4

DEFAULT_OUT = "out"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infocycles", description="Optimal dynamic information acquisition toolkit.")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Subcommand to run.")
    parser.add_argument("--config", type=Path, default=None, help="Path to a key = value config file.")
    parser.add_argument("--out", type=Path, default=None,
                        help="Output directory (default: run.out_dir, $INFOCYCLES_OUT, or ./out).")
    parser.add_argument("--seed", type=int, default=None, help="Random seed; overrides run.seed.")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a config key (repeatable), e.g. --set problem.kappa=0.005")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG.")
    parser.add_argument("--version", action="version", version=f"infocycles {__version__}")
    return parser


def _configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, os.environ.get("INFOCYCLES_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _check_requirements(command: Command, out: Path) -> None:
    """Fail before any work when an upstream artifact is missing."""
    for name in command.requires:
        if not (out / name).exists():
            raise MissingArtifactError(name, producer_of(name))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")

    command = COMMANDS[args.command]
    try:
        config = load_config(args.config, overrides)
        out = args.out or Path(config.run.out_dir or os.environ.get("INFOCYCLES_OUT", DEFAULT_OUT))
        _check_requirements(command, out)
        outcome = command.handler(config, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelError, DomainError) as e:
        print(f"invalid problem: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifactError as e:
        print(str(e), file=sys.stderr)
        return EXIT_MISSING_ARTIFACT

    print(f"\n{'=' * 65}")
    print(f"  infocycles {command.name}  |  {len(outcome.files)} files -> {out}")
    print(f"{'=' * 65}")
    print(tabulate([(name, str(path)) for name, path in outcome.files.items()], headers=["artifact", "path"]))
    if not outcome.converged:
        print("\nwarning: the value bracket did not reach its tolerance", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
