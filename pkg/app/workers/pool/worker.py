import queue
import threading
from typing import Any, Callable, Iterable, Optional

from app.logger import logger

_SENTINEL = None


class TaskWorker(threading.Thread):
    """
    Background worker that pulls `(index, item)` jobs from a shared queue, applies `fn`
    and stores the result under its index. Stops at a sentinel or when `stop_event` is set
    (another worker failed), so a failing pool drains quickly.
    """

    def __init__(self, thread_name: str, fn: Callable[[Any], Any], jobs: queue.Queue, results: dict,
                 errors: dict, stop_event: threading.Event, on_done: Optional[Callable[[], None]] = None):
        """
        Args:
            thread_name (str): Name of the worker thread.
            fn (Callable): Task function applied to every item.
            jobs (queue.Queue): Shared job queue of `(index, item)` tuples.
            results (dict): Shared index -> result mapping.
            errors (dict): Shared index -> exception mapping.
            stop_event (threading.Event): Set when any task fails.
            on_done (Callable, optional): Called after every successful task (progress bars).
        """
        super().__init__(name=thread_name, daemon=True)
        self.fn = fn
        self.jobs = jobs
        self.results = results
        self.errors = errors
        self.stop_event = stop_event
        self.on_done = on_done

    def run(self):
        while True:
            job = self.jobs.get()
            try:
                if job is _SENTINEL:
                    return
                if self.stop_event.is_set():
                    continue
                index, item = job
                try:
                    self.results[index] = self.fn(item)
                    if self.on_done:
                        self.on_done()
                except Exception as e:
                    self.errors[index] = e
                    self.stop_event.set()
                    logger.debug("Task %s failed: %s", index, e)
            finally:
                self.jobs.task_done()


def run_in_pool(fn: Callable[[Any], Any], items: Iterable[Any], workers: int = 1, thread_name: str = "PoolWorker",
                on_done: Optional[Callable[[], None]] = None) -> list:
    """
    Apply `fn` to every item on a bounded pool of `TaskWorker` threads.

    Results come back in item order whatever the completion order, so reductions over them are
    deterministic. With `workers <= 1` the items are processed inline in the caller thread.

    Args:
        fn (Callable): Task function.
        items (Iterable): Task inputs.
        workers (int, optional): Pool size. Defaults to 1.
        thread_name (str, optional): Prefix of the worker thread names.
        on_done (Callable, optional): Called after every successful task.

    Raises:
        Exception: The exception of the lowest-indexed failing task, after all workers are joined.

    Returns:
        list: `[fn(item) for item in items]`.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        out = []
        for item in items:
            out.append(fn(item))
            if on_done:
                on_done()
        return out

    jobs: queue.Queue = queue.Queue()
    results: dict = {}
    errors: dict = {}
    stop_event = threading.Event()

    threads = [
        TaskWorker(f"{thread_name}-{i}", fn, jobs, results, errors, stop_event, on_done)
        for i in range(min(workers, len(items)))
    ]
    for thr in threads:
        thr.start()
    for job in enumerate(items):
        jobs.put(job)
    for _ in threads:
        jobs.put(_SENTINEL)
    for thr in threads:
        thr.join()

    if errors:
        raise errors[min(errors)]
    return [results[i] for i in range(len(items))]
