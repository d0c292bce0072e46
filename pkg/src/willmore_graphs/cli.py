"""Command line: ``willmore-graphs {evolve,eoc,wulff} --config FILE``.

Exit codes: 0 on success, 2 for configuration errors, 3 when a run diverges
or a mesh of an EOC ladder fails.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import app
from .config import parse_config
from .errors import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="willmore-graphs", description="Anisotropic Willmore flow of graphs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("evolve", "integrate the flow and write snapshots"),
        ("eoc", "convergence study against the manufactured solution"),
        ("wulff", "sample Wulff shape slices"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", action="append", default=[], help="INI file (repeatable, later files win)")
        p.add_argument("--preset", help="packaged preset loaded before any --config file")
        p.add_argument("--output", help="output directory (overrides the config and %s)" % app.OUTPUT_ENV)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        paths = ([app.preset_path(args.preset)] if args.preset else []) + list(args.config)
        if not paths:
            raise ConfigError("config", "give --config and/or --preset")
        cfg = parse_config(*paths)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "evolve":
        res = app.run_evolve(cfg, args.output)
        if not res.ok:
            print(f"diverged: {res.error}", file=sys.stderr)
            return EXIT_DIVERGED
        print(f"wrote {len(res.files)} files to {res.directory}")
    elif args.command == "eoc":
        res = app.run_eoc(cfg, args.output)
        print((res.directory / "eoc.txt").read_text(), end="")
        if res.failures:
            return EXIT_DIVERGED
    else:
        files = app.run_wulff(cfg, args.output)
        print(f"wrote {len(files)} files")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
