"""Exhaustive ground truth for small instances.

Independent of the production schedulers on purpose: results come from raw
enumeration so the schedulers can be checked against them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import InstanceTooLargeError
from .model import Task, check_capacity
from .sched_core import check_unique_ids, deadline_key

SUBSET_CAP = 20
PERMUTATION_CAP = 8


@dataclass(frozen=True)
class OracleResult:
    """Maximum number of on-time tasks and one witness set.

    The witness is deadline-sorted and, among all maximum-cardinality
    feasible subsets, has the lexicographically smallest id tuple.
    """

    max_served: int
    witness: tuple[Task, ...]


def _prepare(tasks: Sequence[Task], capacity: float, base_time: float):
    check_capacity(capacity)
    tasks = list(tasks)
    check_unique_ids(tasks)
    ordered = sorted(tasks, key=deadline_key)
    work = [t.cpu_cycles / capacity for t in ordered]
    rel_deadline = [t.deadline - base_time for t in ordered]
    return ordered, work, rel_deadline


def oracle_max_served(tasks: Sequence[Task], capacity: float, base_time: float = 0.0) -> OracleResult:
    """Enumerate all subsets; a subset counts when running it in deadline
    order meets every deadline.

    Deadline order is the only order that needs checking: any feasible
    execution order for a set stays feasible after sorting by deadline,
    since the swap that sorts two adjacent tasks never delays the earlier
    deadline past itself.
    """
    if len(tasks) > SUBSET_CAP:
        raise InstanceTooLargeError(f"subset oracle is capped at {SUBSET_CAP} tasks")
    ordered, work, rel_deadline = _prepare(tasks, capacity, base_time)
    n = len(ordered)

    # Largest cardinality first: the first size with any feasible subset is
    # the answer, and all subsets of that size are still scanned to pick the
    # lexicographically smallest witness.
    for size in range(n, -1, -1):
        best_ids = None
        best_combo = None
        for combo in itertools.combinations(range(n), size):
            elapsed = 0.0
            feasible = True
            for idx in combo:
                elapsed += work[idx]
                if elapsed > rel_deadline[idx]:
                    feasible = False
                    break
            if not feasible:
                continue
            ids = tuple(sorted(ordered[idx].id for idx in combo))
            if best_ids is None or ids < best_ids:
                best_ids = ids
                best_combo = combo
        if best_combo is not None:
            return OracleResult(size, tuple(ordered[idx] for idx in best_combo))
    return OracleResult(0, ())


def oracle_max_served_permutations(
    tasks: Sequence[Task], capacity: float, base_time: float = 0.0
) -> OracleResult:
    """Enumerate all execution orders, skipping any task that would finish
    late; agrees with the subset oracle on every instance."""
    if len(tasks) > PERMUTATION_CAP:
        raise InstanceTooLargeError(f"permutation oracle is capped at {PERMUTATION_CAP} tasks")
    ordered, work, rel_deadline = _prepare(tasks, capacity, base_time)
    n = len(ordered)

    best_count = 0
    best_ids = ()
    best_served: tuple[int, ...] = ()
    for perm in itertools.permutations(range(n)):
        elapsed = 0.0
        served = []
        for idx in perm:
            finish = elapsed + work[idx]
            if finish <= rel_deadline[idx]:
                elapsed = finish
                served.append(idx)
        if not served:
            continue
        ids = tuple(sorted(ordered[idx].id for idx in served))
        if len(served) > best_count or (len(served) == best_count and ids < best_ids):
            best_count = len(served)
            best_ids = ids
            best_served = tuple(sorted(served))
    witness = tuple(ordered[idx] for idx in best_served)
    return OracleResult(best_count, witness)
