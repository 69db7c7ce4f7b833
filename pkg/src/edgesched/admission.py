"""Constant-pass admission test.

Predicts whether re-running the optimal scheduler over the queue plus one
new task would keep the new task, without doing the re-run. One walk over
the merged deadline order accumulates the work of exactly those tasks the
scheduler would have admitted before the new one (every cheaper task, plus
equal-cost tasks that rank ahead of it), and fails on the first counted
task whose deadline the running total overruns.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .errors import PreconditionError
from .model import Schedule, Task, TaskId, check_capacity, is_feasible_order
from .sched_core import cycle_key, deadline_key


@dataclass(frozen=True)
class AdmissionVerdict:
    """Outcome of one admission test.

    Exactly one of ``predicted_completion`` (set when accepted) and
    ``failing_deadline_task`` (set when rejected) is present. The
    prediction is the new task's completion time in the re-scheduled
    queue, exact whenever acceptance displaces no queued task.
    ``slots_visited`` counts deadline-order entries examined.
    """

    accepted: bool
    predicted_completion: float | None = None
    failing_deadline_task: TaskId | None = None
    slots_visited: int = 0


def fod_admit(
    current: Schedule,
    new_task: Task,
    capacity: float,
    current_clock: float,
    *,
    literal: bool = False,
) -> AdmissionVerdict:
    """Admission verdict for ``new_task`` against a feasible, deadline-sorted
    queue, evaluated as if processing starts at ``current_clock``.

    The default mode counts a queued task exactly when it precedes the new
    task in admission order. ``literal`` switches to the simpler published
    rule (count every task at most as expensive, each contributing the new
    task's own work); it exists for comparison only and is not equivalent
    on equal-work ties.
    """
    check_capacity(capacity)
    queued = list(current.accepted)
    keys = [deadline_key(t) for t in queued]
    if any(keys[i] > keys[i + 1] for i in range(len(keys) - 1)):
        raise PreconditionError("queue is not in deadline order")
    if not is_feasible_order(queued, capacity, current_clock):
        raise PreconditionError("queue is not feasible at the given clock")

    position = bisect.bisect_left(keys, deadline_key(new_task))
    merged = queued[:position] + [new_task] + queued[position:]

    new_key = cycle_key(new_task)
    new_work = new_task.cpu_cycles / capacity
    delay = current_clock
    # Completion estimate: every task at an earlier deadline slot runs
    # before the new one, counted toward the outage test or not.
    prefix = current_clock
    predicted = None
    visited = 0
    for task in merged:
        visited += 1
        if predicted is None:
            prefix += task.cpu_cycles / capacity
            if task is new_task:
                predicted = prefix
        if literal:
            if task.cpu_cycles > new_task.cpu_cycles:
                continue
            delay += new_work
        else:
            if task is not new_task and cycle_key(task) >= new_key:
                continue
            delay += task.cpu_cycles / capacity
        if delay > task.deadline:
            return AdmissionVerdict(
                False, failing_deadline_task=task.id, slots_visited=visited
            )
    return AdmissionVerdict(True, predicted_completion=predicted, slots_visited=visited)
