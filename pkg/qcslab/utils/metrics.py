"""
Timing utilities for qcslab.

This module provides the wall-clock helpers used to fill TrialRecord timings
and the meta.json run summary.
"""

import logging
import time
from typing import Any, Callable, Tuple

logger = logging.getLogger(__name__)


class Stopwatch:
    """Context manager measuring elapsed wall time in seconds."""

    def __init__(self, label: str = ""):
        self.label = label
        self.elapsed = 0.0
        self._start = 0.0

    def __enter__(self) -> "Stopwatch":
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc: Any) -> None:
        self.elapsed = time.perf_counter() - self._start
        if self.label:
            logger.debug(f"[TIMING] {self.label}: {self.elapsed:.3f}s")


def time_function(func: Callable) -> Callable[..., Tuple[Any, float]]:
    """
    Decorator to time a function execution.

    Args:
        func: The function to time

    Returns:
        The wrapped function, returning (result, duration_seconds)
    """
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        return result, time.perf_counter() - start_time
    wrapper.__name__ = getattr(func, "__name__", "wrapped")
    wrapper.__doc__ = func.__doc__
    return wrapper
