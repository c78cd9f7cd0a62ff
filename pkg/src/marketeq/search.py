"""Ordered first-success search with optional thread parallelism.

Candidates are evaluated in blocks. Within a block the work runs on a
thread pool, but the winner is always the earliest candidate (in input
order) that succeeded, so the answer does not depend on the thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice
from typing import Any, Callable, Iterable


@dataclass
class Attempt:
    """Outcome of one candidate: ``result`` is None on failure."""

    result: Any = None
    cost: int = 0


@dataclass
class Found:
    index: int
    task: Any
    result: Any
    cost: int   # total cost of every task up to and including the winner


def available_threads():
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def resolve_threads(threads):
    if threads is None:
        return available_threads()
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be a positive integer")
    return threads


def first_success(tasks: Iterable, evaluate: Callable[[Any], Attempt],
                  threads=None, block=None):
    """Earliest task whose attempt succeeds, or None with the total cost.

    Returns ``(found, cost)``; ``found`` is None when every task failed.
    """
    threads = resolve_threads(threads)
    it = iter(tasks)
    spent = 0
    index = 0
    if threads == 1:
        for task in it:
            attempt = evaluate(task)
            spent += attempt.cost
            if attempt.result is not None:
                return Found(index, task, attempt.result, spent), spent
            index += 1
        return None, spent
    block = block or 4 * threads
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while True:
            chunk = list(islice(it, block))
            if not chunk:
                return None, spent
            for k, attempt in enumerate(pool.map(evaluate, chunk)):
                spent += attempt.cost
                if attempt.result is not None:
                    return (Found(index + k, chunk[k], attempt.result, spent),
                            spent)
            index += len(chunk)


def evaluate_all(tasks, evaluate, threads=None):
    """Map ``evaluate`` over ``tasks`` in order, possibly in parallel."""
    threads = resolve_threads(threads)
    tasks = list(tasks)
    if threads == 1:
        return [evaluate(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(evaluate, tasks))
