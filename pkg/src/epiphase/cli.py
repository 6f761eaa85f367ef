"""Command line entry point.

Exit codes: 0 success, 2 unreadable input, 3 schema or config problem,
4 analysis failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import EpiphaseError
from .pipeline import (
    EXIT_ANALYSIS,
    EXIT_IO,
    EXIT_OK,
    EXIT_SCHEMA,
    ConfigError,
    PipelineConfig,
    StageError,
    run_pipeline,
    validate_inputs,
)
from .tables import SchemaError

COMMANDS = {
    "validate": "check every configured input and print a report",
    "run": "full pipeline: tables, JSON and SVG figures",
    "cpd": "case series smoothing and break detection",
    "geo": "dispersion metrics and momentum series",
    "phases": "fuse breaks and geo transitions into phases",
    "fit": "per-phase regressions and sliced break detection",
    "index": "policy indices",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="flat key = value config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="override the output directory")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="epiphase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    if args.seed is not None:
        out["seed"] = str(args.seed)
    if args.out is not None:
        out["out"] = args.out
    return out


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        return _exit_code(exc.cause)
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (SchemaError, ConfigError)):
        return EXIT_SCHEMA
    return EXIT_ANALYSIS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = _overrides(args)
        if "out" in overrides:
            # a command-line output path is relative to the working directory
            overrides["out"] = str(Path(overrides["out"]).resolve())
        cfg = PipelineConfig.load(args.config, overrides)
        if args.command == "validate":
            report = validate_inputs(cfg)
            print("\n".join(report.lines()))
            return EXIT_OK
        manifest = run_pipeline(cfg, args.command)
        print(json.dumps({"out": str(cfg.out), "files": sorted(manifest["files"])}))
        return EXIT_OK
    except (EpiphaseError, OSError) as exc:
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
