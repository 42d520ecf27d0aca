#!/usr/bin/env python3
import os
import logging
from pathlib import Path
from typing import List, Optional
from logging.handlers import RotatingFileHandler

__version__ = "0.1.0"
__author__ = "Karie Moorman"

LOG_DIR_ENV = "SKETCHBIT_LOG_DIR"
DEFAULT_LOG_DIR = "logs"
LOG_FILE = "sketchbit.log"
LOG_MAX_BYTES = 10 * 1024 * 1024
LOG_BACKUPS = 5


class CommandFilter(logging.Filter):
    """Stamps each record with the sketchbit command that produced it"""

    def __init__(self, command: str = "-"):
        super().__init__()
        self.command = command

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = self.command
        return True


_handlers: List[logging.Handler] = []
_command_filter = CommandFilter()


def log_dir_path(log_dir: Optional[str] = None) -> Path:
    """Explicit directory, then $SKETCHBIT_LOG_DIR, then ./logs"""
    return Path(log_dir or os.environ.get(LOG_DIR_ENV) or DEFAULT_LOG_DIR)


def setup_logging(
    verbose: bool = False, command: Optional[str] = None, log_dir: Optional[str] = None
) -> Path:
    """
    Configure the "sketchbit" logger tree for one CLI run.

    Records go to a rotating sketchbit.log and to the console, each tagged with
    the running command (ingest, fit, query, bench, ...). Calling again only
    retags records and adjusts the console level; reset_logging() tears down.

    Returns:
        Path of the log file
    """
    _command_filter.command = command or "-"
    root_logger = logging.getLogger("sketchbit")

    if _handlers:
        for handler in _handlers:
            if not isinstance(handler, RotatingFileHandler):
                handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
        return Path(_handlers[0].baseFilename)

    directory = log_dir_path(log_dir)
    directory.mkdir(parents=True, exist_ok=True)
    log_file = directory / LOG_FILE

    detailed_formatter = logging.Formatter(
        "%(asctime)s - %(command)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    simple_formatter = logging.Formatter("%(levelname)s: %(message)s")

    file_handler = RotatingFileHandler(log_file, maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUPS)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(detailed_formatter)
    file_handler.addFilter(_command_filter)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
    console_handler.setFormatter(detailed_formatter if verbose else simple_formatter)
    console_handler.addFilter(_command_filter)

    root_logger.setLevel(logging.DEBUG)
    for handler in (file_handler, console_handler):
        root_logger.addHandler(handler)
        _handlers.append(handler)
    root_logger.propagate = False
    return log_file


def reset_logging() -> None:
    """Detach and close the handlers installed by setup_logging"""
    root_logger = logging.getLogger("sketchbit")
    while _handlers:
        handler = _handlers.pop()
        root_logger.removeHandler(handler)
        handler.close()
    root_logger.propagate = True
    _command_filter.command = "-"
