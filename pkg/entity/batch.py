from __future__ import annotations
from multiprocessing.pool import ThreadPool
from typing import Callable
import logging


logger = logging.getLogger(__name__)


class TrialBatch():
    """
    Queue of independent calls executed on a thread pool. Results come back
    in insertion order whatever the thread count.

    Methods:
        add(func, *args):
            Queues func(*args).

        execute() -> list:
            Runs the queue and returns the results in insertion order.

        clear():
            Drops queued calls.
    """

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.threads = threads
        self.queue: list[tuple[Callable[..., object], tuple]] = []

    def add(self, func: Callable[..., object], *args):
        self.queue.append((func, args))

    def execute(self) -> list:
        if not self.queue:
            return []
        logger.debug(f"Batch of {len(self.queue)} calls started on {self.threads} threads")
        if self.threads == 1:
            return [func(*args) for func, args in self.queue]
        with ThreadPool(self.threads) as pool:
            return pool.map(lambda item: item[0](*item[1]), self.queue)

    def clear(self):
        self.queue = []
        logger.debug("Batch is cleared")

    def __len__(self) -> int:
        return len(self.queue)

    def __enter__(self) -> TrialBatch:
        return self

    def __exit__(self, exc_type, exc_value, traceback) -> None:
        self.clear()
