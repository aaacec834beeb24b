"""Command-line entry point: ``percwalk <subcommand> [--config FILE] [flags]``."""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import fields

from . import set_threads
from .experiments import SUBCOMMANDS, ConfigError, ExperimentConfig, parse_config, run


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="percwalk",
                                     description="Random walk and percolation cluster experiments")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="file of 'key = value' lines; flags override it")
        for f in fields(ExperimentConfig):
            if f.name == "experiment":
                continue
            sp.add_argument(_flag(f.name), dest=f.name, default=None, metavar="VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if v is not None and k not in ("config", "experiment")}
    overrides["experiment"] = args.experiment
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, overrides)
        set_threads()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            status = run(cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return status
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
