# src/logs.py
from __future__ import annotations
import json
import logging
import os
from logging.handlers import RotatingFileHandler

from .config import LOG_DIR, LOG_LEVEL, LOG_MAX_BYTES, LOG_BACKUP_COUNT

logger = logging.getLogger("gram_calculus")

_handler: logging.Handler | None = None


def setup_logging(log_dir: str = LOG_DIR, level: str = LOG_LEVEL) -> logging.Logger:
    """Attach the rotating JSON-lines file handler once (idempotent)."""
    global _handler
    if _handler is not None:
        return logger
    os.makedirs(log_dir, exist_ok=True)
    handler = RotatingFileHandler(
        os.path.join(log_dir, "app.log"),
        maxBytes=LOG_MAX_BYTES,
        backupCount=LOG_BACKUP_COUNT,
        encoding="utf-8",
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(getattr(logging, level, logging.INFO))
    _handler = handler
    return logger


def teardown_logging() -> None:
    global _handler
    if _handler is None:
        return
    logger.removeHandler(_handler)
    _handler.close()
    _handler = None


def log_json(level: int = logging.INFO, **kwargs) -> None:
    # logging must never break a computation
    try:
        logger.log(level, json.dumps(kwargs, ensure_ascii=False, default=str))
    except Exception:
        pass
