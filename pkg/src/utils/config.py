"""
Configuration

Environment-driven settings. They steer diagnostics and the sweep worker
count only; every computed value depends on command-line flags alone.
"""

import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

ENV_PREFIX = "CIRCLE_CHAINS_"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    """
    Runtime settings read from ``CIRCLE_CHAINS_*`` environment variables.

    Args:
        log_level (str): Logging level name
        log_file (str, optional): Extra log file next to stderr
        sweep_workers (int): Threads used by the sweep campaign
    """

    log_level: str = "WARNING"
    log_file: Optional[str] = None
    sweep_workers: int = Field(default=4, ge=1, le=64)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value):
        value = value.upper()
        if not isinstance(logging.getLevelName(value), int):
            raise ValueError(f"unknown log level {value!r}")
        return value

    @classmethod
    def from_env(cls, environ=None):
        """Build settings from ``environ`` (default: the process environment after ``load_dotenv``)."""
        if environ is None:
            load_dotenv()
            environ = os.environ
        values = {}
        for name in cls.model_fields:
            raw = environ.get(ENV_PREFIX + name.upper())
            if raw not in (None, ""):
                values[name] = raw
        try:
            return cls(**values)
        except ValidationError as exc:
            logger.warning(f"Ignoring invalid environment settings: {exc}")
            return cls()


def configure_logging(settings):
    """Send diagnostics to stderr (and the optional log file) in the project format."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file))
    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT, handlers=handlers, force=True)
