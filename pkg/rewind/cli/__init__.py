import sys

from loguru import logger

from ..config import load_settings


def configure_logging(level: str = None) -> None:
    """Sends log records to standard error; standard output carries the reports."""
    logger.remove()
    logger.add(sys.stderr, level=(level or load_settings().log_level).upper())
