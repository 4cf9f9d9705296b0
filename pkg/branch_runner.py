"""
Branch Runner Selection

Branch enumeration and multi-trial runs take a map-like callable. The runner
decides whether that map is serial or spread over a thread pool.

BCQT_WORKERS (env) or --workers (flag):
- unset / 1  -> SerialBranchRunner
- > 1        -> ThreadPoolBranchRunner

Results are always returned in input order, so reports do not depend on
worker scheduling.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class BranchRunner:
    workers: int = 1

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        raise NotImplementedError


class SerialBranchRunner(BranchRunner):
    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        return [fn(item) for item in items]


class ThreadPoolBranchRunner(BranchRunner):
    def __init__(self, workers: int):
        if workers < 2:
            raise ValueError(f"Thread pool needs at least 2 workers, got {workers}")
        self.workers = workers

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        # Executor.map yields in submission order
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(fn, items))


def resolve_workers(workers: Optional[int] = None) -> int:
    """Flag value if given, else BCQT_WORKERS, else 1."""
    if workers is None:
        raw = os.getenv("BCQT_WORKERS", "1")
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"BCQT_WORKERS must be an integer, got '{raw}'") from None
    if workers < 1:
        raise ValueError(f"Worker count must be >= 1, got {workers}")
    return workers


def get_branch_runner(workers: Optional[int] = None) -> BranchRunner:
    workers = resolve_workers(workers)
    if workers > 1:
        logger.info(f"Using thread pool with {workers} workers")
        return ThreadPoolBranchRunner(workers)
    return SerialBranchRunner()
