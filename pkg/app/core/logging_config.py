"""
Logging Configuration

This module sets up structured logging for magsync.
Log records go to stderr; stdout is reserved for command results.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import structlog
from structlog.stdlib import LoggerFactory

from app.core.config import settings


def setup_logging(level: Optional[str] = None) -> None:
    """
    Set up structured logging configuration.

    This function configures the logging system with:
    - Structured logging using structlog
    - JSON or console rendering depending on LOG_FORMAT
    - Output on stderr
    - Optional file rotation when LOG_FILE is set

    Args:
        level: Log level overriding LOG_LEVEL (e.g. from a --verbose flag)
    """
    log_level = (level or settings.LOG_LEVEL).upper()

    renderer = (
        structlog.processors.JSONRenderer()
        if settings.LOG_FORMAT == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(logging.Formatter("%(message)s"))
    root_logger.addHandler(stream_handler)
    root_logger.setLevel(getattr(logging, log_level))

    if settings.LOG_FILE:
        log_file_path = Path(settings.LOG_FILE)
        log_file_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.TimedRotatingFileHandler(
            filename=settings.LOG_FILE,
            when="midnight",
            interval=1,
            backupCount=settings.LOG_RETENTION_DAYS,
            encoding="utf-8",
        )
        file_handler.setLevel(getattr(logging, log_level))
        root_logger.addHandler(file_handler)

    _configure_external_loggers()

    logger = get_logger(__name__)
    logger.debug(
        "Logging configured",
        log_level=log_level,
        log_format=settings.LOG_FORMAT,
        log_file=settings.LOG_FILE,
    )


def _configure_external_loggers() -> None:
    """Configure logging levels for external libraries."""
    external_loggers = {
        "concurrent.futures": logging.WARNING,
        "numexpr": logging.WARNING,
    }

    for logger_name, level in external_loggers.items():
        logging.getLogger(logger_name).setLevel(level)


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """
    Get a structured logger instance.

    Args:
        name: Name of the logger (usually __name__)

    Returns:
        Configured structlog logger instance
    """
    return structlog.get_logger(name)


def log_error(
    error: Exception,
    context: Optional[Dict[str, Any]] = None,
    level: str = "error",
) -> None:
    """
    Log an error with context.

    Args:
        error: Exception that occurred
        context: Additional context information
        level: Log method to use (rejections inside experiments are warnings)
    """
    logger = get_logger(__name__)
    getattr(logger, level)(
        "Error occurred",
        error=str(error),
        error_type=type(error).__name__,
        reason=getattr(error, "reason", None),
        context=context or {},
    )
