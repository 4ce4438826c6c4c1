"""Thread-pool helpers whose results are identical to serial execution.

Work items are computed independently and gathered by index, so the output
never depends on the thread count. Thread counts resolve from an explicit
value, the ``FSL_THREADS`` environment variable, or available parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["resolve_threads", "map_indexed", "run_blocks"]


def resolve_threads(threads: int | None) -> int:
    """Explicit value, else FSL_THREADS, else available parallelism."""
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("FSL_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def map_indexed(fn: Callable[[T], R], items: Sequence[T], threads: int) -> list[R]:
    """Like ``list(map(fn, items))`` but fanned out over a thread pool."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_blocks(fn: Callable[[int, int], None], total: int, threads: int) -> None:
    """Split [0, total) into contiguous blocks and run ``fn(start, end)``."""
    if threads <= 1 or total <= 1:
        fn(0, total)
        return
    n_blocks = min(threads * 4, total)
    bounds = [round(total * b / n_blocks) for b in range(n_blocks + 1)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(fn, lo, hi)
            for lo, hi in zip(bounds, bounds[1:])
            if hi > lo
        ]
        for fut in futures:
            fut.result()
