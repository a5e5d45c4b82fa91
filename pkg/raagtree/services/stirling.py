from __future__ import annotations

import math
from functools import lru_cache


class StirlingTable:
    """Stirling numbers of the second kind S(n, k) for 0 <= k <= n <= max_n.

    Filled once from S(n, k) = k S(n-1, k) + S(n-1, k-1) with S(0, 0) = 1.
    """

    def __init__(self, max_n: int, max_k: int | None = None) -> None:
        if max_n < 0:
            raise ValueError("max_n must be non-negative")
        self.max_n = max_n
        self.max_k = max_n if max_k is None else min(max_k, max_n)
        rows: list[list[int]] = [[1] + [0] * self.max_k]
        for n in range(1, max_n + 1):
            prev = rows[-1]
            row = [0] * (self.max_k + 1)
            for k in range(1, self.max_k + 1):
                row[k] = k * prev[k] + prev[k - 1]
            rows.append(row)
        self._values = rows

    def __call__(self, n: int, k: int) -> int:
        return self.get(n, k)

    def get(self, n: int, k: int) -> int:
        if n < 0 or k < 0 or k > n:
            return 0
        if n > self.max_n or k > self.max_k:
            raise IndexError(f"S({n}, {k}) is outside the table ({self.max_n}, {self.max_k})")
        return self._values[n][k]

    def row(self, n: int) -> list[int]:
        return list(self._values[n])

    @staticmethod
    def composition_sum(n: int, k: int) -> int:
        """Sum of n!/(q_1! ... q_k!) over ordered compositions q_1 + ... + q_k = n with q_i >= 1.

        Equals k! S(n, k). Enumerates the compositions one by one.
        """
        if k == 0:
            return 1 if n == 0 else 0
        total = 0
        stack: list[tuple[int, int, int]] = [(n, k, 1)]
        while stack:
            remaining, parts, weight = stack.pop()
            if parts == 1:
                total += weight
                continue
            for q in range(1, remaining - parts + 2):
                stack.append((remaining - q, parts - 1, weight * math.comb(remaining, q)))
        return total


@lru_cache(maxsize=8)
def stirling_table(max_n: int) -> StirlingTable:
    return StirlingTable(max_n)
