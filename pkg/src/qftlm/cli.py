"""Command-line entry point: ``qftlm <subcommand> --config <path>``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import KINDS, RUNNERS, load_config
from .regdiag import RegularizationError
from .validation import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

logger = logging.getLogger("qftlm")


def build_parser():
    parser = argparse.ArgumentParser(prog="qftlm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, help="output directory (overrides config 'out')")
        p.add_argument("--seed", type=int, help="master seed (overrides config 'seed')")
        p.add_argument("--threads", type=int, help="worker threads over trace states")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _attach_run_log(out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out_dir / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(message)s"))
    handler.setLevel(logging.INFO)
    logger.addHandler(handler)
    logger.setLevel(logging.INFO)
    return handler


def main(argv=None):
    # argparse exits with 2 on bad usage, matching the config-error code
    args = build_parser().parse_args(argv)
    level = logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    for h in logging.getLogger().handlers:
        h.setLevel(level)
    handler = None
    try:
        cfg = load_config(args.config, args.command, seed=args.seed, threads=args.threads)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        out_dir = args.out or Path(cfg.out)
        handler = _attach_run_log(out_dir)
        RUNNERS[cfg.kind](cfg, out_dir)
    except RegularizationError as exc:
        print(f"qftlm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"qftlm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    finally:
        if handler is not None:
            logger.removeHandler(handler)
            handler.close()
    for path in sorted(out_dir.glob("*.csv")):
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
