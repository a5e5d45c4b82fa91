from __future__ import annotations

import json
import logging

import pytest
from pydantic import ValidationError

from raagtree.core.config import Settings, get_settings
from raagtree.core.logging import JsonFormatter


def test_defaults(settings: Settings):
    assert settings.enumeration_max_nodes == 9
    assert settings.presentation_max_nodes == 6
    assert settings.effective_workers == 1
    assert settings.budgets() == {"enumeration": 9, "presentation": 6, "series": 500, "generators": 20000}


def test_budget_overrides_from_json(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("RAAGTREE_BUDGET", '{"enumeration": 7, "presentation": 5}')
    get_settings.cache_clear()
    settings = get_settings()
    assert settings.enumeration_max_nodes == 7
    assert settings.presentation_max_nodes == 5
    assert settings.budget_overrides == {"enumeration": 7, "presentation": 5}


@pytest.mark.parametrize("raw", ['{"bogus": 3}', '{"series": 0}', "[1, 2]"])
def test_invalid_budgets_are_rejected(monkeypatch: pytest.MonkeyPatch, raw: str):
    monkeypatch.setenv("RAAGTREE_BUDGET", raw)
    with pytest.raises(ValidationError):
        Settings()


def test_workers_and_log_level_validation(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("RAAGTREE_WORKERS", "-1")
    with pytest.raises(ValidationError):
        Settings()
    monkeypatch.setenv("RAAGTREE_WORKERS", "3")
    monkeypatch.setenv("RAAGTREE_LOG_LEVEL", "debug")
    settings = Settings()
    assert settings.effective_workers == 3
    assert settings.log_level == "DEBUG"
    monkeypatch.setenv("RAAGTREE_LOG_LEVEL", "chatty")
    with pytest.raises(ValidationError):
        Settings()


def test_json_formatter_carries_extra_fields():
    record = logging.LogRecord("raagtree.test", logging.INFO, __file__, 1, "suite_done", None, None)
    record.suite = "series"
    record.passed = True
    payload = json.loads(JsonFormatter(timestamps=False).format(record))
    assert payload == {
        "level": "INFO",
        "logger": "raagtree.test",
        "message": "suite_done",
        "suite": "series",
        "passed": True,
    }
