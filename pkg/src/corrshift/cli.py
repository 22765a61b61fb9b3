"""
Command line entry point.

    corrshift run --config config.yaml [--out DIR]
    corrshift stage {adf,roll,chow,garch,dcc} --config config.yaml [--out DIR]

Exit status: 0 success, 1 fatal error, 2 partial success (a stage was
skipped), 64 usage error. ``CORRSHIFT_LOG`` sets verbosity: ``quiet``,
``info`` or ``debug``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from corrshift import __version__
from corrshift.pipeline import EXIT_USAGE, STAGES, cmd_run, cmd_stage

_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which we reserve for partial success
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="corrshift", description="Event-study correlation break analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run every stage and write all tables, figure data and the report")
    run.add_argument("--config", required=True, help="YAML run configuration")
    run.add_argument("--out", help="output directory (overrides output.dir in the config)")

    st = sub.add_parser("stage", help="run a single stage")
    st.add_argument("name", choices=STAGES)
    st.add_argument("--config", required=True)
    st.add_argument("--out")
    return p


def _setup_logging() -> None:
    name = os.environ.get("CORRSHIFT_LOG", "").strip().lower()
    level = _LEVELS.get(name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    _setup_logging()
    if args.command == "run":
        return cmd_run(args.config, args.out)
    return cmd_stage(args.name, args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
