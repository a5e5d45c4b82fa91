from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Mapping, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from raagtree.core.config import get_settings
from raagtree.models.tree import LabeledTree
from raagtree.services.tree_core import parse_tree_text

UTC = timezone.utc  # datetime.UTC is Python 3.11+


class ArtifactStore:
    """Run artifacts live under ``output_dir/<command>/<run_id>/``."""

    def __init__(self) -> None:
        self.settings = get_settings()
        self.settings.ensure_directories()

    def command_dir(self, command: str) -> Path:
        path = self.settings.output_dir / command
        path.mkdir(parents=True, exist_ok=True)
        return path

    def run_dir(self, command: str, run_id: str | None = None) -> Path:
        run_id = run_id or datetime.now(UTC).strftime("%Y%m%dT%H%M%S")
        path = self.command_dir(command) / run_id
        path.mkdir(parents=True, exist_ok=True)
        return path


def write_json(path: Path, payload: dict | list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


def write_jsonl(path: Path, records: Iterable[Mapping[str, Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    rows: list[dict] = []
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            rows.append(json.loads(line))
    return rows


def write_csv(path: Path, records: Sequence[Mapping[str, Any]], fieldnames: Sequence[str] | None = None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fieldnames is None:
        fieldnames = list(dict.fromkeys(key for record in records for key in record))
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), extrasaction="ignore")
        writer.writeheader()
        for record in records:
            writer.writerow(record)
    return path


def read_tree_file(path: Path) -> LabeledTree:
    return parse_tree_text(path.read_text(encoding="utf-8"))


def write_matrix_triplets(path: Path, rows: Sequence[Mapping[int, int]], ncols: int) -> Path:
    """Sparse dump: "rows cols" on the first line, then one "row col value" per nonzero (0-based)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(f"{len(rows)} {ncols}\n")
        for i, row in enumerate(rows):
            for column in sorted(row):
                handle.write(f"{i} {column} {row[column]}\n")
    return path


def read_matrix_triplets(path: Path) -> tuple[list[dict[int, int]], int]:
    with path.open("r", encoding="utf-8") as handle:
        nrows, ncols = (int(x) for x in handle.readline().split())
        rows: list[dict[int, int]] = [{} for _ in range(nrows)]
        for line in handle:
            if not line.strip():
                continue
            i, j, value = (int(x) for x in line.split())
            rows[i][j] = value
    return rows, ncols
