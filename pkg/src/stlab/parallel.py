"""Ordered fan-out over worker pools.

Results always come back in input order, so reductions done by the caller
are independent of the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor

ENV_THREADS = "STLAB_THREADS"


def default_workers() -> int:
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"{ENV_THREADS} must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


def map_ordered(fn, items, *, workers: int = 1, processes: bool = False) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    pool_cls = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with pool_cls(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def chunked(seq, size: int):
    return [seq[i : i + size] for i in range(0, len(seq), size)]
