from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

from raagtree.core.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")


def split_range(total: int, parts: int) -> list[tuple[int, int]]:
    """Contiguous [start, stop) ranges covering 0..total, at most ``parts`` of them, none empty."""
    parts = max(1, min(parts, total)) if total else 1
    base, extra = divmod(total, parts)
    ranges: list[tuple[int, int]] = []
    start = 0
    for index in range(parts):
        stop = start + base + (1 if index < extra else 0)
        ranges.append((start, stop))
        start = stop
    return ranges


class PartitionRunner:
    """Maps a picklable function over partitions and folds the results in partition order."""

    def __init__(self, workers: int | None = None) -> None:
        self.settings = get_settings()
        self.workers = workers if workers else self.settings.effective_workers

    def fold(
        self,
        func: Callable[..., T],
        partitions: Sequence[tuple[Any, ...]],
        merge: Callable[[T, T], T],
        initial: T,
    ) -> T:
        result = initial
        if self.workers == 1 or len(partitions) <= 1:
            for args in partitions:
                result = merge(result, func(*args))
            return result

        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            futures = [pool.submit(func, *args) for args in partitions]
            for index, future in enumerate(futures):
                result = merge(result, future.result())
                logger.debug("partition_done", extra={"partition": index, "partitions": len(futures)})
        return result
