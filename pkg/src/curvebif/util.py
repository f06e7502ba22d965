"""Small shared runtime helpers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_budget", "parallel_map"]


def thread_budget():
    """Worker cap from CURVEBIF_THREADS (default 1: fully serial runs)."""
    raw = os.environ.get("CURVEBIF_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def parallel_map(fn, items):
    """Order-preserving map over independent work items.

    Runs serially unless CURVEBIF_THREADS raises the budget; results are
    returned in input order either way, so output is deterministic.
    """
    items = list(items)
    n = thread_budget()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as ex:
        return list(ex.map(fn, items))
