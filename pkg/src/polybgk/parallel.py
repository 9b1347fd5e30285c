"""Per-cell work distribution.

Cells are independent and each is computed by exactly the same code path, so
results do not depend on the worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def map_cells(fn, n: int, threads: int = 1) -> list:
    if threads <= 1 or n <= 1:
        return [fn(k) for k in range(n)]
    with ThreadPoolExecutor(max_workers=min(threads, n)) as pool:
        return list(pool.map(fn, range(n)))
