from __future__ import annotations

import json
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any


def _default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return str(value)


class JsonFormatter(logging.Formatter):
    _skip_keys = {
        "args",
        "created",
        "exc_info",
        "exc_text",
        "filename",
        "funcName",
        "levelname",
        "levelno",
        "lineno",
        "module",
        "msecs",
        "message",
        "msg",
        "name",
        "pathname",
        "process",
        "processName",
        "relativeCreated",
        "stack_info",
        "taskName",
        "thread",
        "threadName",
    }

    def __init__(self, *, timestamps: bool = True) -> None:
        super().__init__()
        self.timestamps = timestamps

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {}
        if self.timestamps:
            payload["timestamp"] = datetime.now(timezone.utc).isoformat()
        payload.update(
            {
                "level": record.levelname,
                "logger": record.name,
                "message": record.getMessage(),
            }
        )
        for key, value in record.__dict__.items():
            if key in self._skip_keys or key.startswith("_"):
                continue
            payload.setdefault(key, value)

        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=_default)


def configure_logging(level: str = "WARNING", *, timestamps: bool = True) -> None:
    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(level.upper())

    # stdout carries the report stream
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter(timestamps=timestamps))
    root.addHandler(handler)
