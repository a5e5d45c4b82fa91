from __future__ import annotations

from pathlib import Path

import pytest


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "slow: long-running exact computations (order-400 series, n = 6 presentations)")


@pytest.fixture(autouse=True)
def settings(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("RAAGTREE_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("RAAGTREE_WORKERS", "1")
    monkeypatch.delenv("RAAGTREE_BUDGET", raising=False)

    from raagtree.core.config import get_settings

    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()


@pytest.fixture()
def path7_file(tmp_path: Path) -> Path:
    path = tmp_path / "path7.txt"
    path.write_text("# path on seven nodes\n7\n1 2\n2 3\n3 4\n4 5\n5 6\n6 7\n", encoding="utf-8")
    return path
