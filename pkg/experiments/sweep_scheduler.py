"""
Scheduler for Sweep Points

Runs the independent points of a sweep, optionally on a thread pool, and
hands results back ordered by axis index regardless of completion order.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


class SweepScheduler:
    """
    Ordered worker pool for sweep points.

    A failing point aborts the sweep: the error is logged with its axis index
    and re-raised, so no partial table is ever written.
    """

    def __init__(self, workers: int = 1):
        """
        Initialize scheduler.

        Args:
            workers: number of worker threads (1 runs points in the calling thread)
        """
        if workers < 1:
            raise ValueError(f"workers must be at least 1, got {workers}")
        self.workers = workers
        self.points_done = 0

        logger.info(f"Initialized SweepScheduler with {workers} worker(s)")

    def _run_with_logging(self, point_function: Callable[[Any], T], index: int, value: Any) -> T:
        """Wrapper to run one point with timing and failure context."""
        start = time.perf_counter()
        try:
            result = point_function(value)
        except Exception as e:
            logger.error(f"Sweep point {index} (axis value {value!r}) failed: {e}")
            raise
        logger.debug(f"Point {index} done in {time.perf_counter() - start:.2f} s")
        return result

    def map(self, point_function: Callable[[Any], T], values: Sequence[Any]) -> List[T]:
        """
        Evaluate point_function on every axis value.

        Returns:
            Results in the order of `values`
        """
        values = list(values)
        start = time.perf_counter()
        if self.workers == 1 or len(values) <= 1:
            results = [self._run_with_logging(point_function, i, v) for i, v in enumerate(values)]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(self._run_with_logging, point_function, i, v) for i, v in enumerate(values)]
                # result() re-raises the first failure in axis order
                results = [f.result() for f in futures]
        self.points_done += len(results)
        logger.info(f"Completed {len(results)} sweep points in {time.perf_counter() - start:.2f} seconds")
        return results

    def get_schedule_info(self) -> dict:
        return {
            'workers': self.workers,
            'mode': 'sequential' if self.workers == 1 else 'thread-pool',
            'points_done': self.points_done,
        }
