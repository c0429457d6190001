import asyncio
import os
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from contextlib import asynccontextmanager
from typing import Any, Callable

MAX_WORKERS_ENV = "MLMSDA_MAX_WORKERS"


def resolve_max_workers(configured: int) -> int:
    """Cap the configured worker count by ``MLMSDA_MAX_WORKERS`` when it is set."""
    workers = max(1, int(configured))
    cap = os.getenv(MAX_WORKERS_ENV)
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


class WorkerPool:
    """Bounded executor for independent training runs.

    With ``max_workers == 1`` jobs run on a single thread so results and logs stay in
    submission order; otherwise a process pool is used since training is CPU bound.
    """

    def __init__(self, max_workers: int, use_processes: bool | None = None):
        self.max_workers = resolve_max_workers(max_workers)
        if use_processes is None:
            use_processes = self.max_workers > 1
        self.executor: Executor = (
            ProcessPoolExecutor(max_workers=self.max_workers)
            if use_processes
            else ThreadPoolExecutor(max_workers=self.max_workers)
        )
        self.semaphore = asyncio.Semaphore(self.max_workers)

    @asynccontextmanager
    async def throttle(self):
        async with self.semaphore:
            yield

    async def run(self, fn: Callable[..., Any], *args: Any) -> Any:
        async with self.throttle():
            loop = asyncio.get_running_loop()
            return await loop.run_in_executor(self.executor, fn, *args)

    def shutdown(self) -> None:
        self.executor.shutdown(wait=True)

    async def __aenter__(self) -> "WorkerPool":
        return self

    async def __aexit__(self, *exc_info) -> None:
        self.shutdown()
