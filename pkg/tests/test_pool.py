import threading
import time

import pytest

from app.workers import run_in_pool


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_results_keep_item_order(workers):
    def slow_square(x):
        time.sleep(0.001 * (10 - x))
        return x * x

    assert run_in_pool(slow_square, range(10), workers=workers) == [x * x for x in range(10)]


def test_empty_input():
    assert run_in_pool(lambda x: x, [], workers=4) == []


def test_threads_are_named():
    names = run_in_pool(lambda _: threading.current_thread().name, range(6), workers=3, thread_name="StratumWorker")
    assert all(name.startswith("StratumWorker-") for name in names)


def test_progress_callback_counts_successes():
    done = []
    run_in_pool(lambda x: x, range(7), workers=3, on_done=lambda: done.append(1))
    assert len(done) == 7


def test_task_failure_is_raised_in_the_caller():
    def fail_three(x):
        if x == 3:
            raise ValueError(f"task {x}")
        return x

    with pytest.raises(ValueError, match="task 3"):
        run_in_pool(fail_three, range(10), workers=4)


def test_serial_failure_stops_at_the_first_error():
    seen = []

    def fail_odd(x):
        seen.append(x)
        if x % 2:
            raise ValueError(f"task {x}")
        return x

    with pytest.raises(ValueError, match="task 1"):
        run_in_pool(fail_odd, range(10), workers=1)
    assert seen == [0, 1]
