import pytest

from schedule import (
    ScheduleError,
    schedule,
)

def square(n):
    return n * n

def poisoned(n):
    if n == 6:
        raise ArithmeticError(f"item {n} is poisoned")

    return n + 100

def test_results_in_input_order():
    assert schedule(square, [3, 1, 2]) == [9, 1, 4]

def test_worker_count_does_not_change_results():
    items = list(range(10))
    assert schedule(square, items, jobs=4) == schedule(square, items, jobs=1)

def test_empty_items():
    assert schedule(square, [], jobs=3) == []

@pytest.mark.parametrize('jobs', [1, 3])
def test_failure_reports_every_other_result(jobs):
    with pytest.raises(ScheduleError) as error:
        schedule(poisoned, list(range(10)), jobs=jobs)

    assert list(error.value.failures) == [6]
    assert isinstance(error.value.failures[6], ArithmeticError)
    assert len(error.value.results) == 9
    assert error.value.results[9] == 109
    assert 'item 6' in str(error.value)

def test_jobs_must_be_positive():
    with pytest.raises(ValueError):
        schedule(square, [1], jobs=0)
