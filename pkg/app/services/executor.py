"""
Executor Service

Order-preserving fan-out of independent work units (sensor traces,
experiment repetitions) over a thread pool.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from app.core.config import settings

T = TypeVar("T")
R = TypeVar("R")


def run_parallel(
    func: Callable[[T], R],
    items: Iterable[T],
    workers: Optional[int] = None,
) -> List[R]:
    """
    Apply func to every item, returning results in input order.

    Args:
        func: Pure function of one work unit
        items: Work units
        workers: Thread count; defaults to EXPERIMENT_WORKERS. 1 runs inline.

    Returns:
        Results in the order of items
    """
    work = list(items)
    max_workers = workers or settings.EXPERIMENT_WORKERS
    if max_workers <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(func, work))
