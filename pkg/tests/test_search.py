import threading
import time

import pytest

from marketeq.search import (Attempt, available_threads, evaluate_all,
                             first_success, resolve_threads)


def jittery(winners):
    # later tasks finish first so a naive "first to return" would be wrong
    def evaluate(k):
        time.sleep(0.001 * (20 - k % 20))
        return Attempt(k * 10 if k in winners else None, cost=k + 1)
    return evaluate


@pytest.mark.parametrize("threads", [1, 2, 4, 8])
def test_earliest_success_wins(threads):
    found, cost = first_success(range(50), jittery({17, 3, 40}), threads,
                                block=7)
    assert (found.index, found.task, found.result) == (3, 3, 30)
    assert cost == found.cost == sum(range(1, 5))


@pytest.mark.parametrize("threads", [1, 4])
def test_no_success_reports_total_cost(threads):
    found, cost = first_success(range(10), jittery(set()), threads)
    assert found is None and cost == sum(range(1, 11))


def test_generator_consumed_lazily():
    seen = []

    def tasks():
        for k in range(1000):
            seen.append(k)
            yield k

    first_success(tasks(), jittery({2}), threads=1)
    assert seen == [0, 1, 2]


def test_evaluate_all_keeps_order():
    names = set()

    def evaluate(k):
        names.add(threading.current_thread().name)
        time.sleep(0.001 * (5 - k % 5))
        return k * k

    assert evaluate_all(range(20), evaluate, threads=4) == \
        [k * k for k in range(20)]
    assert evaluate_all([], evaluate, threads=1) == []


def test_thread_resolution():
    assert available_threads() >= 1
    assert resolve_threads(None) == available_threads()
    assert resolve_threads(3) == 3
    with pytest.raises(ValueError):
        resolve_threads(0)
