import threading
import time

import pytest

from entity.batch import TrialBatch


def slow_square(x):
    time.sleep(0.001 * (5 - x))
    return x * x, threading.get_ident()


@pytest.mark.parametrize("threads", [1, 4])
def test_results_in_insertion_order(threads):
    with TrialBatch(threads) as batch:
        for x in range(5):
            batch.add(slow_square, x)
        assert len(batch) == 5
        results = batch.execute()
    assert [value for value, _ in results] == [0, 1, 4, 9, 16]
    assert len(batch) == 0


def test_serial_runs_on_caller_thread():
    batch = TrialBatch(1)
    batch.add(slow_square, 1)
    assert batch.execute()[0][1] == threading.get_ident()


def test_empty_batch():
    assert TrialBatch(2).execute() == []


def test_clear():
    batch = TrialBatch()
    batch.add(slow_square, 1)
    batch.clear()
    assert batch.execute() == []


def test_invalid_thread_count():
    with pytest.raises(ValueError):
        TrialBatch(0)


def test_errors_propagate():
    batch = TrialBatch(2)
    batch.add(int, "x")
    with pytest.raises(ValueError):
        batch.execute()
