"""Order-preserving fan-out used by the evaluators."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


class OrphanPredictionError(ValueError):
    """Predictions reference ids that are not in the manifest."""

    def __init__(self, ids: Sequence[str]):
        super().__init__(f"predictions for unknown sample id(s): {', '.join(ids)}")
        self.ids = list(ids)


def parallel_map(func: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    """``[func(x) for x in items]``, optionally across processes.

    Results come back in input order, so any reduction over them is
    independent of the worker count.
    """
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=chunk))
