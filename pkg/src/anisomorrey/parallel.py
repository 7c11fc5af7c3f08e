"""Order-preserving parallel map capped by ``ANISO_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_count", "parallel_map"]


def thread_count() -> int:
    raw = os.environ.get("ANISO_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ANISO_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"ANISO_THREADS must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, run on up to ``threads`` threads.

    Results come back in input order, so reductions over them are
    deterministic regardless of scheduling.
    """
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
