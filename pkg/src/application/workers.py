from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar('T')
R = TypeVar('R')


def resolve_threads(threads: int | str | None) -> int:
    """Worker count from a CLI/config value: 'auto' (or None) means one per CPU."""
    if threads is None or threads == 'auto':
        return max(1, os.cpu_count() or 1)
    count = int(threads)
    if count < 1:
        raise ValueError(f'threads must be >= 1 or auto, got {threads!r}')
    return count


class WorkerMap:
    """Ordered map over a thread pool; plain ``map`` when one worker is asked for.

    Results come back in input order whatever the worker count.
    """

    def __init__(self, threads: int | str | None = 1) -> None:
        self.jobs = resolve_threads(threads)
        self._pool: ThreadPoolExecutor | None = None

    def __enter__(self) -> Callable[[Callable[[T], R], Iterable[T]], list[R]]:
        if self.jobs <= 1:
            return lambda fn, items: list(map(fn, items))
        self._pool = ThreadPoolExecutor(max_workers=self.jobs, thread_name_prefix='pcircle')
        pool = self._pool
        return lambda fn, items: list(pool.map(fn, items))

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True, cancel_futures=True)
            self._pool = None
