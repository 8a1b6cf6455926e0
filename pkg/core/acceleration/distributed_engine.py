#!/usr/bin/env python3
"""
Scenario Engine
===============

Runs independent scenarios on a worker pool. Every scenario carries its
own derived seed, so results do not depend on the backend, the worker
count or the completion order; they are returned in submission order.
"""

import logging
import multiprocessing as mp
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import psutil
from tqdm import tqdm

from config.settings import Config

logger = logging.getLogger(__name__)


@dataclass
class EngineMetrics:
    """Resource figures for one batch of scenarios"""
    backend: str
    workers: int
    tasks_completed: int
    tasks_failed: int
    wall_time: float
    avg_task_time: float
    cpu_percent: float
    memory_mb: float

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class ScenarioTask:
    """One unit of work: a scenario payload and its position in the run"""
    index: int
    task_id: str
    payload: Any


@dataclass
class TaskResult:
    index: int
    task_id: str
    success: bool
    value: Any = None
    error: Optional[str] = None
    error_type: Optional[str] = None
    elapsed: float = 0.0
    extra: Dict[str, Any] = field(default_factory=dict)


def _execute(fn: Callable[[Any], Any], task: ScenarioTask) -> TaskResult:
    start = time.time()
    try:
        value = fn(task.payload)
        return TaskResult(task.index, task.task_id, True, value, elapsed=time.time() - start)
    except Exception as e:
        # recorded as a failure of this scenario, the run goes on
        logger.error("Scenario %s failed: %s", task.task_id, e, exc_info=True,
                     extra={'scenario': task.task_id})
        return TaskResult(task.index, task.task_id, False, error=str(e), error_type=type(e).__name__,
                          elapsed=time.time() - start, extra={'invariant': getattr(e, 'invariant', None)})


class ScenarioEngine:
    """
    Worker pool for scenario runs with serial, threading and
    multiprocessing backends
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = self._default_config()
        self.config.update(config or {})
        self.backend = self._detect_backend()
        self.metrics: Optional[EngineMetrics] = None

    def _default_config(self) -> Dict[str, Any]:
        """Default pool configuration"""
        return {
            'backend': Config.WORKER_BACKEND,  # serial, threading, multiprocessing or auto
            'num_workers': Config.NUM_WORKERS,
            'show_progress': Config.SHOW_PROGRESS,
        }

    def _detect_backend(self) -> str:
        backend = self.config['backend']
        if self.config['num_workers'] <= 1:
            return 'serial'
        if backend == 'auto':
            return 'multiprocessing' if mp.cpu_count() > 1 else 'threading'
        if backend not in ('serial', 'threading', 'multiprocessing'):
            raise ValueError(f"unknown backend {backend!r}")
        return backend

    def _executor(self):
        if self.backend == 'multiprocessing':
            return ProcessPoolExecutor(max_workers=self.config['num_workers'])
        return ThreadPoolExecutor(max_workers=self.config['num_workers'])

    def run(self, fn: Callable[[Any], Any], payloads: Sequence[Any],
            task_ids: Optional[Sequence[str]] = None) -> List[TaskResult]:
        """
        Apply fn to every payload.

        With the multiprocessing backend fn and the payloads must be
        picklable. Results come back ordered like the payloads.
        """
        task_ids = list(task_ids) if task_ids is not None else [str(i) for i in range(len(payloads))]
        tasks = [ScenarioTask(i, tid, p) for i, (tid, p) in enumerate(zip(task_ids, payloads))]
        process = psutil.Process()
        process.cpu_percent(None)
        start = time.time()

        results: List[TaskResult] = []
        progress = tqdm(total=len(tasks), desc="scenarios", disable=not self.config['show_progress'])
        if self.backend == 'serial' or len(tasks) <= 1:
            for task in tasks:
                results.append(_execute(fn, task))
                progress.update(1)
        else:
            with self._executor() as executor:
                futures = [executor.submit(_execute, fn, task) for task in tasks]
                for future in as_completed(futures):
                    results.append(future.result())
                    progress.update(1)
        progress.close()

        results.sort(key=lambda r: r.index)
        wall = time.time() - start
        done = sum(1 for r in results if r.success)
        self.metrics = EngineMetrics(
            backend=self.backend,
            workers=int(self.config['num_workers']),
            tasks_completed=done,
            tasks_failed=len(results) - done,
            wall_time=wall,
            avg_task_time=sum(r.elapsed for r in results) / len(results) if results else 0.0,
            cpu_percent=process.cpu_percent(None),
            memory_mb=process.memory_info().rss / 1024 ** 2,
        )
        logger.info("Ran %d scenarios on the %s backend in %.2fs", len(results), self.backend, wall,
                    extra={'elapsed': wall, 'failed': len(results) - done})
        return results
