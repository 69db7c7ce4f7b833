"""Core domain types and feasibility arithmetic.

Units are seconds for time, CPU cycles for work, bits for payloads, and
cycles per second for capacity. Deadlines are absolute clock values. All
composite types are immutable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import InvalidCapacityError

TaskId = tuple[int, int]

TASK_CSV_FIELDS = ("id", "arrival_s", "cycles", "deadline_s", "bits", "user")


@dataclass(frozen=True, slots=True)
class Task:
    """One offloadable job.

    ``id`` pairs the origin user with a per-user sequence number and is
    unique within a run.
    """

    id: TaskId
    arrival_time: float
    cpu_cycles: float
    deadline: float
    data_size: float
    origin_user: int

    def __post_init__(self):
        if self.cpu_cycles <= 0:
            raise ValueError(f"task {self.id}: cpu_cycles must be positive")
        if self.data_size < 0:
            raise ValueError(f"task {self.id}: data_size must be nonnegative")
        if self.arrival_time < 0:
            raise ValueError(f"task {self.id}: arrival_time must be nonnegative")
        if self.deadline < self.arrival_time:
            raise ValueError(f"task {self.id}: deadline precedes arrival")


@dataclass(frozen=True)
class Schedule:
    """An ordered run plan for one server.

    ``accepted`` is the execution order; ``rejected`` holds every input task
    that was not kept. Producers guarantee the accepted order is feasible
    from ``base_time``.
    """

    base_time: float
    accepted: tuple[Task, ...]
    rejected: frozenset[Task]
    capacity: float


@dataclass(frozen=True)
class OutageVerdict:
    """Whether one completion time overruns its deadline."""

    is_outage: bool
    completion_time: float
    slack: float


def check_capacity(capacity: float) -> None:
    if not capacity > 0:
        raise InvalidCapacityError(f"capacity must be positive, got {capacity!r}")


def outage_check(completion_time: float, deadline: float) -> OutageVerdict:
    slack = deadline - completion_time
    return OutageVerdict(slack < 0, completion_time, slack)


def completion_times(schedule: Schedule) -> list[float]:
    """Absolute finish time of each accepted task, in schedule order."""
    check_capacity(schedule.capacity)
    out = []
    elapsed = 0.0
    for task in schedule.accepted:
        elapsed += task.cpu_cycles / schedule.capacity
        out.append(schedule.base_time + elapsed)
    return out

def is_feasible_order(tasks: Sequence[Task], capacity: float, base_time: float) -> bool:
    """True when running ``tasks`` back to back from ``base_time`` meets
    every deadline."""
    check_capacity(capacity)
    elapsed = 0.0
    for task in tasks:
        elapsed += task.cpu_cycles / capacity
        if elapsed > task.deadline - base_time:
            return False
    return True


def format_task_id(task_id: TaskId) -> str:
    return f"{task_id[0]}:{task_id[1]}"


def parse_task_id(text: str) -> TaskId:
    user, _, seq = text.partition(":")
    return (int(user), int(seq))


def _task_from_record(record: dict, where: str) -> Task:
    try:
        user = int(record["user"])
        return Task(
            id=(user, int(record["id"])),
            arrival_time=float(record["arrival_s"]),
            cpu_cycles=float(record["cycles"]),
            deadline=float(record["deadline_s"]),
            data_size=float(record["bits"]),
            origin_user=user,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{where}: {exc}") from exc


def read_tasks_csv(stream: IO[str]) -> list[Task]:
    """Parse tasks from CSV with header ``id,arrival_s,cycles,deadline_s,bits,user``.

    Raises ValueError naming the offending row (1-based, header included).
    An empty stream yields an empty list.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        return []
    missing = set(TASK_CSV_FIELDS) - set(reader.fieldnames)
    if missing:
        raise ValueError(f"row 1: missing columns {sorted(missing)}")
    tasks = []
    for row_number, record in enumerate(reader, start=2):
        tasks.append(_task_from_record(record, f"row {row_number}"))
    return tasks


def write_tasks_csv(stream: IO[str], tasks: Iterable[Task]) -> None:
    writer = csv.writer(stream)
    writer.writerow(TASK_CSV_FIELDS)
    for t in tasks:
        writer.writerow(
            [t.id[1], repr(t.arrival_time), repr(t.cpu_cycles), repr(t.deadline), repr(t.data_size), t.origin_user]
        )


def read_tasks_json(stream: IO[str]) -> list[Task]:
    """Parse tasks from a JSON array of objects with the CSV field names."""
    records = json.load(stream)
    if not isinstance(records, list):
        raise ValueError("item 1: expected a JSON array of task objects")
    return [_task_from_record(rec, f"item {i}") for i, rec in enumerate(records, start=1)]


def write_tasks_json(stream: IO[str], tasks: Iterable[Task]) -> None:
    records = [
        {
            "id": t.id[1],
            "arrival_s": t.arrival_time,
            "cycles": t.cpu_cycles,
            "deadline_s": t.deadline,
            "bits": t.data_size,
            "user": t.origin_user,
        }
        for t in tasks
    ]
    json.dump(records, stream, indent=2, sort_keys=True)
    stream.write("\n")
