"""Single-server schedulers that maximize the number of on-time tasks.

Candidates are admitted from cheapest to most expensive; each candidate is
pinned to its deadline-order slot and kept only if no occupied slot at or
after it would overrun its deadline. Empty slots contribute no work.

``schedule_optimal`` is the auditable reference with a quadratic outage
scan; ``schedule_optimal_fast`` replaces the scan with index trees for an
O(n log n) total and produces identical output on every input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import PreconditionError
from .model import Schedule, Task, check_capacity
from .slack_tree import INF, MinSlackTree, WorkFenwick


@dataclass(frozen=True)
class CycleOrder:
    """Input positions sorted by nondecreasing work; ties prefer the later
    deadline, then the smaller id."""

    indices: tuple[int, ...]


@dataclass(frozen=True)
class DeadlineOrder:
    """Input positions sorted by nondecreasing deadline; ties prefer the
    smaller work, then the smaller id."""

    indices: tuple[int, ...]


@dataclass
class SlotArray:
    """One execution slot per deadline position; None marks an empty slot."""

    slots: list[Task | None]

    def occupied(self) -> list[Task]:
        return [t for t in self.slots if t is not None]


def cycle_key(task: Task) -> tuple:
    return (task.cpu_cycles, -task.deadline, task.id)


def deadline_key(task: Task) -> tuple:
    return (task.deadline, task.cpu_cycles, task.id)


def build_cycle_order(tasks: Sequence[Task]) -> CycleOrder:
    order = sorted(range(len(tasks)), key=lambda i: cycle_key(tasks[i]))
    return CycleOrder(tuple(order))


def build_deadline_order(tasks: Sequence[Task]) -> DeadlineOrder:
    order = sorted(range(len(tasks)), key=lambda i: deadline_key(tasks[i]))
    return DeadlineOrder(tuple(order))


def check_unique_ids(tasks: Sequence[Task]) -> None:
    if len({t.id for t in tasks}) != len(tasks):
        raise PreconditionError("duplicate task ids in one instance")


def _admissible(tasks: Sequence[Task], base_time: float) -> list[Task]:
    # A task whose deadline is not after base_time can never finish on time.
    return [t for t in tasks if t.deadline > base_time]


def schedule_optimal(tasks: Sequence[Task], capacity: float, base_time: float = 0.0) -> Schedule:
    """Reference scheduler; total cost is quadratic in the task count."""
    check_capacity(capacity)
    tasks = list(tasks)
    check_unique_ids(tasks)
    fresh = _admissible(tasks, base_time)

    by_slot = [fresh[i] for i in build_deadline_order(fresh).indices]
    slot_of = {task.id: s for s, task in enumerate(by_slot)}
    work = [t.cpu_cycles / capacity for t in by_slot]
    rel_deadline = [t.deadline - base_time for t in by_slot]
    n = len(by_slot)
    q = SlotArray([None] * n)
    slots = q.slots

    for ci in build_cycle_order(fresh).indices:
        candidate = fresh[ci]
        target = slot_of[candidate.id]
        slots[target] = candidate
        elapsed = 0.0
        for j in range(target):
            if slots[j] is not None:
                elapsed += work[j]
        outage = False
        for j in range(target, n):
            if slots[j] is None:
                continue
            elapsed += work[j]
            if elapsed > rel_deadline[j]:
                outage = True
                break
        if outage:
            slots[target] = None

    accepted = tuple(q.occupied())
    kept = {t.id for t in accepted}
    rejected = frozenset(t for t in tasks if t.id not in kept)
    return Schedule(base_time, accepted, rejected, capacity)


def schedule_optimal_fast(tasks: Sequence[Task], capacity: float, base_time: float = 0.0) -> Schedule:
    """Same admissions as ``schedule_optimal``.

    The outage scan over a suffix of slots becomes one range-minimum query
    on per-slot slacks; inserting a candidate shifts every later slack down
    by its work via a lazy range add, and a rejection undoes both updates.
    """
    check_capacity(capacity)
    tasks = list(tasks)
    check_unique_ids(tasks)
    fresh = _admissible(tasks, base_time)

    by_slot = [fresh[i] for i in build_deadline_order(fresh).indices]
    slot_of = {task.id: s for s, task in enumerate(by_slot)}
    work = [t.cpu_cycles / capacity for t in by_slot]
    rel_deadline = [t.deadline - base_time for t in by_slot]
    n = len(by_slot)
    slack = MinSlackTree(n)
    done = WorkFenwick(n)
    taken = [False] * n

    for ci in build_cycle_order(fresh).indices:
        candidate = fresh[ci]
        target = slot_of[candidate.id]
        w = work[target]
        elapsed = done.prefix(target - 1) + w
        slack.assign(target, rel_deadline[target] - elapsed)
        if target + 1 < n:
            slack.add_range(target + 1, n - 1, -w)
        if slack.suffix_min(target) < 0:
            slack.assign(target, INF)
            if target + 1 < n:
                slack.add_range(target + 1, n - 1, w)
        else:
            taken[target] = True
            done.add(target, w)

    accepted = tuple(by_slot[i] for i in range(n) if taken[i])
    kept = {t.id for t in accepted}
    rejected = frozenset(t for t in tasks if t.id not in kept)
    return Schedule(base_time, accepted, rejected, capacity)
