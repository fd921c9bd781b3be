"""CLI entry point for bilinpdo."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable

from bilinear import bilinear_describe
from cli.experiments import (
    PRESETS,
    ExperimentConfig,
    ExperimentName,
    build_config,
    describe_experiments,
)
from cli.report import write_csv, write_svg
from cli.runners import ExperimentResult, run
from cli.selftest import FAULTS, MODULES, run_selftest
from fields import fields_describe
from partitions import partitions_describe
from sharpness import sharpness_describe
from spaces import spaces_describe
from symbols import symbols_describe
from utils.config_validator import ConfigValidationError
from utils.errors import ToleranceFailure
from utils.logging_config import LogContext, setup_logging

LOGGER = logging.getLogger("bilinpdo.cli")

VERSION = "0.1.0"

PACKAGE_DESCRIPTIONS: dict[str, Callable[[], str]] = {
    "fields": fields_describe,
    "partitions": partitions_describe,
    "spaces": spaces_describe,
    "symbols": symbols_describe,
    "bilinear": bilinear_describe,
    "sharpness": sharpness_describe,
}

RESULTS_FILE = "results.csv"
PLOT_FILE = "plot.svg"


def _add_logging_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--log-level",
        default="WARNING",
        help="Logging level (DEBUG, INFO, WARNING, ERROR).",
    )
    parser.add_argument(
        "--structured-logs",
        action="store_true",
        help="Emit log records as JSON lines.",
    )
    parser.add_argument("--log-file", help="Optional file to copy log records to.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bilinpdo",
        description="Numerical experiments on bilinear pseudo-differential operators",
    )
    parser.add_argument("--version", action="version", version=f"bilinpdo {VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in ExperimentName:
        preset_parser = subparsers.add_parser(name.value, help=PRESETS[name].summary)
        preset_parser.add_argument(
            "overrides",
            nargs="*",
            metavar="key=value",
            help="Parameter or grid (n, T, N) overrides.",
        )
        preset_parser.add_argument(
            "--config", help="Path to a key = value, JSON, TOML or YAML config file."
        )
        preset_parser.add_argument(
            "--out", help="Output directory for results.csv and plot.svg."
        )
        preset_parser.add_argument("--seed", type=int, help="Random seed.")
        _add_logging_arguments(preset_parser)
        preset_parser.set_defaults(handler=run_experiment, experiment=name.value)

    selftest_parser = subparsers.add_parser(
        "selftest", help="Run the acceptance criteria and print one line each."
    )
    selftest_parser.add_argument(
        "--filter",
        dest="module",
        choices=MODULES,
        help="Only run the criteria of one module.",
    )
    selftest_parser.add_argument(
        "--inject-fault",
        dest="faults",
        action="append",
        default=[],
        choices=FAULTS,
        help="Debug flag: corrupt a component so its criterion must fail.",
    )
    _add_logging_arguments(selftest_parser)
    selftest_parser.set_defaults(handler=run_selftest_command)

    describe_parser = subparsers.add_parser(
        "describe", help="List experiments and their parameter keys."
    )
    describe_parser.set_defaults(handler=run_describe)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # exit code 2 is reserved for tolerance failures
        return 1 if exc.code == 2 else int(exc.code or 0)
    if hasattr(args, "handler"):
        return args.handler(args)
    parser.print_help()
    return 1


def run_experiment(args: argparse.Namespace) -> int:
    configure_logging(args.log_level, args.structured_logs, args.log_file)
    try:
        config = build_config(
            args.experiment,
            config_path=Path(args.config).expanduser() if args.config else None,
            overrides=args.overrides,
            seed=args.seed,
            output_dir=Path(args.out) if args.out else None,
        )
        with LogContext(experiment=config.experiment.value, seed=config.seed):
            LOGGER.info("Running %s on grid %s", config.experiment.value, config.grid)
            result = run(config)
            write_outputs(config, result)
        print(result.summary_line())
        if not result.passed:
            raise ToleranceFailure(result.summary_line(), row=result.offending)
    except ToleranceFailure as exc:
        print(f"offending row: {format_row(exc.row)}")
        return 2
    except (ConfigValidationError, FileNotFoundError) as exc:
        LOGGER.error("Configuration error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ValueError) as exc:
        LOGGER.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - safeguard for unexpected issues.
        LOGGER.exception("Unexpected error during %s: %s", args.experiment, exc)
        return 3
    return 0


def write_outputs(config: ExperimentConfig, result: ExperimentResult) -> list[Path]:
    """Write ``results.csv``, the optional plot and any attachments."""
    out = config.output_dir
    provenance = {
        "n": config.grid.n,
        "T": config.grid.T,
        "N": config.grid.N,
        "truncation": "none",
    }
    written = [write_csv(out / RESULTS_FILE, result.rows, provenance)]
    if result.plot is not None:
        written.append(write_svg(out / PLOT_FILE, result.plot))
    for attach in result.attachments:
        written.append(attach(out))
    return written


def format_row(row: dict[str, Any]) -> str:
    if not row:
        return "(none)"
    return ", ".join(f"{key}={value}" for key, value in row.items())


def run_selftest_command(args: argparse.Namespace) -> int:
    configure_logging(args.log_level, args.structured_logs, args.log_file)
    try:
        return run_selftest(sys.stdout, module=args.module, faults=args.faults)
    except ConfigValidationError as exc:
        LOGGER.error("Configuration error: %s", exc)
        return 1
    except Exception as exc:  # pragma: no cover - safeguard for unexpected issues.
        LOGGER.exception("Unexpected error during selftest: %s", exc)
        return 3


def run_describe(args: argparse.Namespace) -> int:
    for name, describe in PACKAGE_DESCRIPTIONS.items():
        print(f"{name}: {describe()}")
    print()
    for line in describe_experiments():
        print(line)
    return 0


def configure_logging(
    level: str, structured: bool = False, log_file: str | None = None
) -> None:
    setup_logging(level=level, structured=structured, log_file=log_file)


if __name__ == "__main__":
    raise SystemExit(main())
