"""
==========================
Logger Module
==========================

This module provides a logging setup for the application using Python's built-in logging library.
It supports both file and console logging, with a rotating log file and a queue for thread-safe logging
from the stratum and replication worker threads.

Features:
- Uses `QueueHandler` to send log records to a queue.
- Uses `QueueListener` to listen for log records and write them to file and console.
- Console output goes to standard error; standard output is reserved for command results.
- Formats log messages with timestamp, level, thread name, and message.

Usage:
>>> from app.logger import logger, configure_logger, shutdown_logger
>>> configure_logger()
>>> logger.info("This is an info message.")
>>> shutdown_logger()  # Important to stop the listener when done.

*Author: Sudharshan TK*\n
*Created: 2025-08-23*
"""

import logging
import logging.handlers
import os
import queue as std_queue
from pathlib import Path
from typing import Optional

from app.helpers import config as default_config

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(threadName)s] %(message)s"

# Public logger object other modules import
logger = logging.getLogger("sslhs")
logger.setLevel(logging.INFO)

# If nothing configures logging, fall back to console so imports can safely log.
if not logger.handlers:
    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console)

# Internal state
_configured = False
_queue: Optional[std_queue.Queue] = None
_listener: Optional[logging.handlers.QueueListener] = None


def configure_logger(log_folder: Optional[Path] = None, level: Optional[str] = None, console: bool = True,
                     to_file: bool = True):
    """
    Configure the logger with a rotating file handler and a console handler.
    Records are pushed through a queue and written by a `QueueListener` thread,
    so worker threads never block on file I/O.

    Args:
        log_folder (Path, optional): Folder of `sslhs.log`. Defaults to `LOG_FOLDER` from the config.
        level (str, optional): Log level name. Defaults to `LOG_LEVEL` from the config.
        console (bool, optional): Also echo records to standard error. Defaults to True.
        to_file (bool, optional): Write `sslhs.log`; when False no folder is created. Defaults to True.
    """
    global _configured, _queue, _listener

    if _configured:
        return

    logger.setLevel(getattr(logging, (level or default_config.LOG_LEVEL).upper(), logging.INFO))

    # Remove the import-time fallback handler so it doesn't duplicate output
    for h in list(logger.handlers):
        logger.removeHandler(h)

    fmt = logging.Formatter(LOG_FORMAT)

    _queue = std_queue.Queue(-1)
    logger.addHandler(logging.handlers.QueueHandler(_queue))

    handlers: list[logging.Handler] = []
    if to_file:
        log_folder = Path(log_folder or default_config.LOG_FOLDER)
        os.makedirs(log_folder, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_folder, "sslhs.log"), maxBytes=5 * 1024 * 1024, backupCount=5, encoding="utf-8"
        )
        file_handler.setFormatter(fmt)
        handlers.append(file_handler)

    if console:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(fmt)
        handlers.append(console_handler)

    _listener = logging.handlers.QueueListener(_queue, *handlers)
    _listener.start()

    _configured = True


def shutdown_logger():
    """
    Shutdown the logger by stopping the listener and closing all handlers.
    A console fallback handler is re-attached so later imports can still log.
    """
    global _listener, _configured

    if _listener:
        try:
            _listener.stop()
        except Exception:
            pass
        for h in _listener.handlers:
            try:
                h.flush()
                h.close()
            except Exception:
                pass
        _listener = None

    for h in list(logger.handlers):
        try:
            h.flush()
            h.close()
        except Exception:
            pass
        logger.removeHandler(h)

    fallback = logging.StreamHandler()
    fallback.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(fallback)
    _configured = False
