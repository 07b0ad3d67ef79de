"""Process-pool execution of independent sweep cells."""

from __future__ import annotations

import multiprocessing as mp
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed

from loguru import logger
from tqdm import tqdm


def default_workers() -> int:
    """80% of the CPU cores, at least one."""
    return max(1, int(mp.cpu_count() * 0.8))


class ParallelCellRunner[TaskT, ResultT]:
    """Run ``worker`` over tasks and return results in task order.

    ``worker`` must be a module-level function so it can be pickled. An exception
    escaping the worker is turned into a result by ``on_error``; the remaining
    tasks still run.
    """

    def __init__(
        self,
        worker: Callable[[TaskT], ResultT],
        on_error: Callable[[TaskT, BaseException], ResultT],
        max_workers: int | None = None,
        desc: str = "Running cells",
    ):
        self.worker = worker
        self.on_error = on_error
        self.max_workers = max_workers if max_workers else default_workers()
        self.desc = desc

    def run(self, tasks: Sequence[TaskT]) -> list[ResultT]:
        if not tasks:
            logger.warning("No cells to run")
            return []
        logger.info(f"Running {len(tasks)} cell(s) with {self.max_workers} worker(s)")
        if self.max_workers == 1:
            return self._run_serial(tasks)
        return self._run_parallel(tasks)

    def _run_serial(self, tasks: Sequence[TaskT]) -> list[ResultT]:
        results = []
        with tqdm(total=len(tasks), desc=self.desc) as pbar:
            for task in tasks:
                results.append(self._guarded(task))
                pbar.update(1)
        return results

    def _guarded(self, task: TaskT) -> ResultT:
        try:
            return self.worker(task)
        except Exception as e:
            logger.warning(f"Cell {task} failed: {e}")
            return self.on_error(task, e)

    def _run_parallel(self, tasks: Sequence[TaskT]) -> list[ResultT]:
        results: dict[int, ResultT] = {}
        with (
            ProcessPoolExecutor(max_workers=self.max_workers) as executor,
            tqdm(total=len(tasks), desc=self.desc) as pbar,
        ):
            future_to_index = {
                executor.submit(self.worker, task): index for index, task in enumerate(tasks)
            }
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results[index] = future.result()
                except Exception as e:
                    logger.warning(f"Cell {tasks[index]} failed: {e}")
                    results[index] = self.on_error(tasks[index], e)
                pbar.update(1)
        return [results[index] for index in range(len(tasks))]
