"""Thread fan-out that keeps results in submission order."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(task: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """``[task(item) for item in items]``, spread over ``workers`` threads when > 1.

    The first exception raised by any task propagates after the pool drains.
    """
    if workers <= 1 or len(items) <= 1:
        return [task(item) for item in items]
    results: List[R] = [None] * len(items)  # type: ignore[list-item]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(task, item): i for i, item in enumerate(items)}
        for fut in as_completed(futures):
            results[futures[fut]] = fut.result()
    return results
