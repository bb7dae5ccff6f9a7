"""
CLI Routes Configuration

This module builds the command-line parser and registers every command.
Each command module exposes `register(subparsers)`, which adds its
sub-parser and binds its handler as `args.handler`.
"""

import argparse

from app.cli.commands import align, experiment, session, simulate, sync
from app.core.config import settings


class UsageError(Exception):
    """Invalid command line (exit code 1)."""


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


COMMANDS = [simulate, session, sync, align, experiment]


def build_parser() -> CliArgumentParser:
    """Create the top-level parser with all commands registered."""
    parser = CliArgumentParser(prog=settings.APP_NAME, description=settings.APP_DESCRIPTION)
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {settings.APP_VERSION}"
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log at DEBUG level on stderr"
    )
    subparsers = parser.add_subparsers(
        dest="command", required=True, parser_class=CliArgumentParser
    )
    for command in COMMANDS:
        command.register(subparsers)
    return parser
