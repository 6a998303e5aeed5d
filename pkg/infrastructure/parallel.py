from __future__ import annotations

import concurrent.futures
import logging
from typing import Callable, Iterable, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(
    func: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
    on_result: Callable[[int, R], None] | None = None,
) -> list[R]:
    """Apply func to every item, results in input order.

    on_result(position, result) runs in the calling thread as results
    arrive in input order.
    """
    items = list(items)
    results: list[R] = []
    if int(workers) <= 1 or len(items) <= 1:
        for position, item in enumerate(items):
            result = func(item)
            results.append(result)
            if on_result is not None:
                on_result(position, result)
        return results

    logger.debug(f"[map_ordered] {len(items)} tasks on {workers} workers")
    with concurrent.futures.ThreadPoolExecutor(max_workers=int(workers)) as executor:
        futures = [executor.submit(func, item) for item in items]
        try:
            for position, future in enumerate(futures):
                result = future.result()
                results.append(result)
                if on_result is not None:
                    on_result(position, result)
        except BaseException:
            for future in futures:
                future.cancel()
            raise
    return results
