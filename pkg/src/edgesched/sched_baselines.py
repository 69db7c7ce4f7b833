"""Comparison schedulers.

Priority dispatch rules pick one task at a time by a scalar key; the
late-job-removal scheduler builds a maximal on-time batch by evicting the
most expensive scanned task whenever a deadline breaks; the insertion
discipline admits a task only where it disturbs nobody and never evicts.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import PreconditionError
from .model import Schedule, Task, check_capacity, is_feasible_order
from .sched_core import check_unique_ids, deadline_key

POLICY_KINDS = ("edf", "sdf", "dstar_s")
SIZE_KEYS = ("cycles", "bits")


@dataclass(frozen=True)
class DispatchPolicy:
    """A greedy selection rule over a waiting queue.

    ``edf`` keys on the deadline, ``sdf`` on the task size, ``dstar_s`` on
    deadline times size. ``size_key`` picks which size proxy is used
    (required CPU cycles by default, payload bits otherwise).
    """

    kind: str
    drop_stale: bool = True
    size_key: str = "cycles"

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.size_key not in SIZE_KEYS:
            raise ValueError(f"unknown size key {self.size_key!r}")

    def key(self, task: Task) -> float:
        if self.kind == "edf":
            return task.deadline
        size = task.cpu_cycles if self.size_key == "cycles" else task.data_size
        if self.kind == "sdf":
            return size
        return task.deadline * size


def next_task(
    policy: DispatchPolicy, queue: Iterable[Task], now: float, capacity: float
) -> tuple[Task | None, tuple[Task, ...]]:
    """Select the queue element minimizing the policy key (ties by id).

    With ``drop_stale`` set, a selected task that can no longer finish by
    its deadline is marked dropped and selection repeats; dropped tasks are
    returned alongside the choice. The queue itself is not mutated.
    """
    check_capacity(capacity)
    pending = sorted(queue, key=lambda t: (policy.key(t), t.id))
    dropped = []
    for task in pending:
        if policy.drop_stale and now + task.cpu_cycles / capacity > task.deadline:
            dropped.append(task)
            continue
        return task, tuple(dropped)
    return None, tuple(dropped)


def moore_hodgson(tasks: Sequence[Task], capacity: float, base_time: float = 0.0) -> Schedule:
    """Scan tasks in deadline order; on a deadline break, evict the
    largest-work task seen so far (ties to the smaller id)."""
    check_capacity(capacity)
    tasks = list(tasks)
    check_unique_ids(tasks)
    order = sorted(tasks, key=deadline_key)
    kept: list[tuple[float, tuple, Task]] = []
    evicted: set = set()
    elapsed = 0.0
    for task in order:
        w = task.cpu_cycles / capacity
        heapq.heappush(kept, (-task.cpu_cycles, task.id, task))
        elapsed += w
        if elapsed > task.deadline - base_time:
            _, _, victim = heapq.heappop(kept)
            elapsed -= victim.cpu_cycles / capacity
            evicted.add(victim.id)

    accepted = tuple(t for t in order if t.id not in evicted)
    rejected = frozenset(t for t in tasks if t.id in evicted)
    return Schedule(base_time, accepted, rejected, capacity)


def dedas_insert(queue: Schedule, new_task: Task, now: float) -> int | None:
    """Find a 1-based insertion position for ``new_task`` that keeps every
    queued deadline intact, trying the tail first; existing tasks are never
    moved or evicted. Returns None when no position works."""
    sequence = list(queue.accepted)
    capacity = queue.capacity
    if not is_feasible_order(sequence, capacity, now):
        raise PreconditionError("queue is not feasible at the given clock")
    if is_feasible_order(sequence + [new_task], capacity, now):
        return len(sequence) + 1
    for position in range(1, len(sequence) + 2):
        candidate = sequence[: position - 1] + [new_task] + sequence[position - 1 :]
        if is_feasible_order(candidate, capacity, now):
            return position
    return None
