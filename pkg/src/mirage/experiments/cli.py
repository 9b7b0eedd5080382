"""Command-line entry point: ``mirage <command> --config <spec.json | preset>``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Final

from pydantic import ValidationError

from ..common.exceptions import ConfigError, MirageError
from ..data.service import DATA_DIR_ENV, fetch_cifar10
from .config import ExperimentSpec, load_spec
from .models import StageKind
from .service import Experiments

__all__ = ["EXIT_CONFIG_ERROR", "EXIT_OK", "EXIT_STAGE_FAILURE", "main"]

logger = logging.getLogger(__name__)

EXIT_OK: Final = 0
EXIT_STAGE_FAILURE: Final = 1
EXIT_CONFIG_ERROR: Final = 2

_STAGES: Final = {
    "train": StageKind.TRAIN,
    "attack": StageKind.ATTACK,
    "evaluate": StageKind.METRICS,
    "run": StageKind.REPORT,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirage",
        description="Model-inversion benchmark for traditionally and "
        "adversarially trained classifiers.",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name in (*_STAGES, "report"):
        sub = commands.add_parser(name, help=f"{name} stage of an experiment")
        sub.add_argument(
            "--config",
            required=True,
            help="Experiment spec (JSON file) or preset name, e.g. benchmark-desk.",
        )
        sub.add_argument("--seed", type=int, default=None)
        sub.add_argument("--output-dir", type=Path, default=None)
        sub.add_argument(
            "--resume",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="Skip stage items whose outputs exist with a matching config hash.",
        )

    fetch = commands.add_parser("fetch-data", help="download CIFAR-10 into the cache")
    fetch.add_argument(
        "--root",
        type=Path,
        default=None,
        help=f"Cache directory (default: ${DATA_DIR_ENV}).",
    )
    return parser


def _spec(args: argparse.Namespace) -> ExperimentSpec:
    return load_spec(args.config).with_overrides(
        seed=args.seed, output_dir=args.output_dir
    )


def _execute(args: argparse.Namespace) -> None:
    if args.command == "fetch-data":
        root = args.root or os.environ.get(DATA_DIR_ENV)
        if root is None:
            raise ConfigError(f"Pass --root or set ${DATA_DIR_ENV}")
        fetch_cifar10(root)
        return

    experiments = Experiments(_spec(args))
    if args.command == "report":
        print(experiments.report().render())
        return
    manifest = experiments.run(until=_STAGES[args.command], resume=args.resume)
    logger.info(
        "%s: %d artifacts recorded in %s",
        manifest.experiment,
        len(manifest.entries),
        experiments.store.describe("manifest.json"),
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        _execute(args)
    except (ConfigError, ValidationError) as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_CONFIG_ERROR
    except MirageError as exc:
        logger.error("%s", exc)
        return EXIT_STAGE_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
