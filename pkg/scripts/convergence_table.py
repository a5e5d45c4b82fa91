from __future__ import annotations

import argparse
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from raagtree.core.config import get_settings
from raagtree.core.logging import configure_logging
from raagtree.services.series_engine import constants, convergence_table
from raagtree.services.storage import ArtifactStore, write_csv

COLUMNS = ("n", "prob_root_deep", "mean_Y", "mean_N_given_deep", "deep_fraction", "upsilon_per_node")


def main() -> None:
    parser = argparse.ArgumentParser(description="Exact finite-n values next to their limit constants")
    parser.add_argument("--n", type=int, action="append", default=None, help="repeatable; default 10..400")
    parser.add_argument("--csv", action="store_true", help="also write convergence.csv under the output directory")
    args = parser.parse_args()

    settings = get_settings()
    configure_logging(settings.log_level)
    ns = args.n or [10, 25, 50, 100, 200, 400]
    rows = convergence_table(ns)

    table = constants(12)
    print("Limits")
    print("------")
    for name in ("c3", "d3", "c3_d3", "unrooted_deep", "unrooted_upsilon"):
        print(f"- {name:18s} {table[name].render(12)}")
    print()
    print("  ".join(f"{column:>18s}" for column in COLUMNS))
    for row in rows:
        cells = []
        for column in COLUMNS:
            value = row[column]
            cells.append(f"{value:>18d}" if column == "n" else f"{'-' if value is None else f'{value:.12f}':>18s}")
        print("  ".join(cells))

    if args.csv:
        path = write_csv(ArtifactStore().command_dir("convergence") / "convergence.csv", rows, COLUMNS)
        print(f"\nWrote {path}")


if __name__ == "__main__":
    main()
