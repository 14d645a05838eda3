"""Data-parallel execution of sweep stages.

A stage is a list of independent tasks; ``map_tasks`` returns only after every
task of the stage has finished, which is the barrier between stages. Tasks
write into disjoint slices of shared numpy arrays, so results do not depend on
the number of workers or on the order in which tasks run.
"""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Protocol, TypeVar

from stairsolve.errors import InvalidArgumentError

T = TypeVar("T")


class TaskExecutor(Protocol):
    workers: int

    def map_tasks(self, fn: Callable[[T], None], tasks: Sequence[T]) -> None: ...


class SerialExecutor:
    workers = 1

    def map_tasks(self, fn: Callable[[T], None], tasks: Sequence[T]) -> None:
        for task in tasks:
            fn(task)


class SweepExecutor:
    def __init__(self, workers: int = 1):
        if workers < 1:
            raise InvalidArgumentError(f"worker count must be >= 1, got {workers}")
        self.workers = workers
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def map_tasks(self, fn: Callable[[T], None], tasks: Sequence[T]) -> None:
        if self._pool is None or len(tasks) < 2:
            for task in tasks:
                fn(task)
            return
        # list() drains the iterator so worker exceptions surface here
        list(self._pool.map(fn, tasks))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self) -> "SweepExecutor":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
