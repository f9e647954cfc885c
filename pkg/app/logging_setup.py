import logging
import sys
from typing import TextIO

from app.config import LOG_LEVEL, LOG_FORMAT, LOGGER_NAME

LOG_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}


def setup_logging(level: str = LOG_LEVEL, stream: TextIO = sys.stdout):
    """
    Configure the logging system with a simple, readable format.

    The CLI passes sys.stderr so that stdout stays reserved for command output.
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(LOG_LEVELS.get(level.upper(), logging.INFO))

    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(stream)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))

    root_logger.addHandler(console_handler)

    app_logger = logging.getLogger(LOGGER_NAME)
    app_logger.setLevel(LOG_LEVELS.get(level.upper(), logging.INFO))

    return app_logger
