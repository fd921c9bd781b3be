"""Thread-count control for FFT batches and per-block maps."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

LOGGER = logging.getLogger("bilinpdo.threads")

THREADS_ENV = "BILINPDO_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Return the parallelism cap from ``BILINPDO_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        LOGGER.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
        return 1
    if value < 1:
        LOGGER.warning("Ignoring non-positive %s=%r", THREADS_ENV, raw)
        return 1
    return value


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map ``func`` over ``items`` keeping input order.

    Results are returned in submission order so downstream reductions see the
    same sequence whatever the worker count.
    """
    materialized = list(items)
    workers = min(worker_count(), max(len(materialized), 1))
    if workers <= 1:
        return [func(item) for item in materialized]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, materialized))
