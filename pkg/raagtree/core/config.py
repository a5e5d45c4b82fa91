from __future__ import annotations

import json
import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Any

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

BUDGET_KEYS = {
    "enumeration": "enumeration_max_nodes",
    "presentation": "presentation_max_nodes",
    "series": "series_max_order",
    "generators": "generator_budget",
}


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    app_name: str = Field(default="raagtree", alias="RAAGTREE_APP_NAME")
    app_version: str = Field(default="0.4.0", alias="RAAGTREE_APP_VERSION")
    log_level: str = Field(default="WARNING", alias="RAAGTREE_LOG_LEVEL")

    enumeration_max_nodes: int = Field(default=9, alias="RAAGTREE_ENUMERATION_MAX_NODES")
    presentation_max_nodes: int = Field(default=6, alias="RAAGTREE_PRESENTATION_MAX_NODES")
    series_max_order: int = Field(default=500, alias="RAAGTREE_SERIES_MAX_ORDER")
    generator_budget: int = Field(default=20000, alias="RAAGTREE_GENERATOR_BUDGET")
    pair_enumeration_limit: int = Field(default=400, alias="RAAGTREE_PAIR_ENUMERATION_LIMIT")
    verify_relators: bool = Field(default=True, alias="RAAGTREE_VERIFY_RELATORS")

    workers: int = Field(default=0, alias="RAAGTREE_WORKERS")
    default_seed: int = Field(default=20240607, alias="RAAGTREE_SEED")
    output_dir: Path = Field(default=Path("data/runs"), alias="RAAGTREE_OUTPUT_DIR")
    enable_metrics: bool = Field(default=True, alias="RAAGTREE_ENABLE_METRICS")

    budget_overrides: dict[str, int] = Field(default_factory=dict, alias="RAAGTREE_BUDGET")

    @field_validator(
        "enumeration_max_nodes",
        "presentation_max_nodes",
        "series_max_order",
        "generator_budget",
        "pair_enumeration_limit",
    )
    @classmethod
    def validate_positive_int(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("value must be positive")
        return value

    @field_validator("workers")
    @classmethod
    def validate_workers(cls, value: int) -> int:
        if value < 0:
            raise ValueError("workers must be 0 (auto) or positive")
        return value

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, value: str) -> str:
        normalized = value.strip().upper()
        # logging.getLevelNamesMapping() is Python 3.11+; it returns a copy of _nameToLevel.
        level_names = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))()
        if normalized not in level_names:
            raise ValueError(f"unknown log level: {value}")
        return normalized

    @field_validator("budget_overrides", mode="before")
    @classmethod
    def parse_budget_overrides(cls, value: Any) -> dict[str, int]:
        if value in (None, ""):
            return {}
        if isinstance(value, str):
            value = json.loads(value)
        if not isinstance(value, dict):
            raise ValueError("RAAGTREE_BUDGET must be a JSON object")
        parsed: dict[str, int] = {}
        for key, raw in value.items():
            if key not in BUDGET_KEYS:
                raise ValueError(f"unknown budget key: {key} (expected one of {sorted(BUDGET_KEYS)})")
            number = int(raw)
            if number <= 0:
                raise ValueError(f"budget {key} must be positive")
            parsed[key] = number
        return parsed

    @model_validator(mode="after")
    def apply_budget_overrides(self) -> Settings:
        for key, number in self.budget_overrides.items():
            setattr(self, BUDGET_KEYS[key], number)
        return self

    @property
    def effective_workers(self) -> int:
        return self.workers or (os.cpu_count() or 1)

    def budgets(self) -> dict[str, int]:
        return {key: getattr(self, field) for key, field in BUDGET_KEYS.items()}

    def ensure_directories(self) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
