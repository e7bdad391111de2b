"""Structured JSON logging on stderr; stdout is left to command payloads."""

import logging
import sys
from fractions import Fraction
from typing import Any, Optional

import structlog

_QUIET_LIBRARIES = ("numpy", "sympy")


def _render_default(value: Any) -> Any:
    """JSON fallback for log values: exact rationals as "num/den", sets sorted, anything else by repr."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (set, frozenset, tuple)):
        return sorted(value, key=str) if isinstance(value, (set, frozenset)) else list(value)
    return repr(value)


def setup_logging(log_level: str) -> None:
    """Configure structlog over the stdlib root logger.

    Args:
        log_level: The minimum log level string (e.g., "INFO", "DEBUG").
    """
    level = getattr(logging, log_level.upper(), logging.INFO)

    shared = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
    ]
    structlog.configure(
        processors=[
            *shared,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        structlog.stdlib.ProcessorFormatter(
            processor=structlog.processors.JSONRenderer(default=_render_default),
            foreign_pre_chain=shared,
        )
    )

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(level)
    root.addHandler(handler)
    for name in _QUIET_LIBRARIES:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))

    get_logger(__name__).debug("Logging configured", level=log_level, output="stderr")


def get_logger(name: Optional[str] = None) -> structlog.stdlib.BoundLogger:
    """Return a structlog logger; events carry any context bound with ``bound_contextvars``."""
    return structlog.stdlib.get_logger(name or "northcott_towers")
