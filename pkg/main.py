"""
magsync - Main Application Entry Point

This module serves as the command-line entry point: it parses arguments,
configures logging and dispatches to the selected command.

Exit codes:
    0  success
    1  usage error (bad arguments, unknown command or experiment)
    2  data or estimation failure; a JSON error document is written to stderr
"""

import sys
from typing import Optional, Sequence

from app.cli.routes import UsageError, build_parser
from app.core.errors import MagSyncError
from app.core.logging_config import get_logger, log_error, setup_logging
from app.io.reports import dumps_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


def _report(payload: dict) -> None:
    sys.stderr.write(dumps_json(payload).decode("utf-8"))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the application."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        _report({"error": "usage", "message": str(e), "context": {}})
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)

    setup_logging("DEBUG" if args.verbose else None)
    logger = get_logger(__name__)
    logger.debug("Command started", command=args.command)

    try:
        return args.handler(args)
    except MagSyncError as e:
        log_error(e, {"command": args.command})
        _report(e.to_dict())
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
