"""Order-preserving process-pool map used by sweeps and scaling suites."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence


def resolve_workers(workers: int | None) -> int:
    if workers is None or workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise ValueError("workers must be >= 0")
    return int(workers)


def pmap(fn: Callable, items: Sequence, workers: int | None = 1, chunksize: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally across processes.

    Results come back in input order whatever the worker count, so callers
    never depend on scheduling.
    """
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    if chunksize is None:
        chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items, chunksize=chunksize))


def imap(fn: Callable, items: Iterable, workers: int | None = 1):
    """Like :func:`pmap` but yields ``(index, result)`` as jobs finish in order."""
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        for i, x in enumerate(items):
            yield i, fn(x)
        return
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        for i, r in enumerate(ex.map(fn, items)):
            yield i, r
