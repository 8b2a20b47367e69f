"""Command-line entry point: ``scqec run``, ``scqec validate`` and ``scqec list-experiments``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dynamics import DensityMatrixError
from .experiments import ConfigError, list_experiments, run, validate
from .linalg import NotHermitianError
from .operators import EnvelopeOverflowError, TruncationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
NUMERICAL_GUARDS = (TruncationError, EnvelopeOverflowError, DensityMatrixError, NotHermitianError)


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError([{"field": "config", "message": str(exc)}]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([{"field": "config", "message": f"invalid JSON: {exc}"}]) from None
    if not isinstance(cfg, dict):
        raise ConfigError([{"field": "config", "message": "top level must be a JSON object"}])
    return cfg


def _report_config_error(exc: ConfigError) -> int:
    print(json.dumps({"ok": False, "errors": exc.errors}, indent=2), file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
        results = run(cfg, workers=args.workers)
    except ConfigError as exc:
        return _report_config_error(exc)
    except NUMERICAL_GUARDS as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for res in results:
        print(res.write(args.out))
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        return _report_config_error(exc)
    errors = validate(cfg)
    print(json.dumps({"ok": not errors, "errors": errors}, indent=2))
    return EXIT_CONFIG if errors else EXIT_OK


def cmd_list(args) -> int:
    for name in list_experiments():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scqec", description="Squeezed-cat code experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config and write CSV + JSON metadata")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="processes for sweep points (default: number of cores)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("list-experiments", help="print the available experiment presets")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
