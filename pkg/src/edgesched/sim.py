"""Deterministic discrete-event simulation of multi-server offloading.

Each task arrival runs a three-step exchange: nearby servers report their
queue state, the user runs an admission test per candidate and picks the
server promising the earliest completion, then ships the task over one
reserved uplink channel. The task enters the chosen server's queue when
its transmission finishes, triggering a re-schedule there; queued tasks
displaced by the re-schedule are counted as outages, as are tasks nobody
would take.

Determinism: every random quantity comes from a substream keyed by
(seed, purpose, entity), so identical (config, seed) pairs replay the
same run event for event. Event ties break on (time, kind, sequence).
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .admission import fod_admit
from .errors import NoCoverageError, ConfigError
from .model import (
    Schedule,
    Task,
    TaskId,
    completion_times,
    format_task_id,
    is_feasible_order,
)
from .phy import (
    ChannelDraw,
    RadioConfig,
    UserMotionState,
    achievable_rate,
    channel_gain,
    mobility_step,
    sample_fading,
    transmission_delay,
)
from .sched_baselines import DispatchPolicy, dedas_insert, moore_hodgson, next_task
from .sched_core import schedule_optimal_fast
from .workload_config import RunConfig, substream

# Event kind priorities; lower runs first at equal timestamps.
EXEC_DONE = 0
TRANS_DONE = 1
ARRIVAL = 2
MOBILITY = 3

_KIND_NAMES = {EXEC_DONE: "exec_done", TRANS_DONE: "transmit_done", ARRIVAL: "arrival", MOBILITY: "mobility"}

# Links shorter than this are treated as this long; the pathloss law
# diverges at zero range.
MIN_LINK_DISTANCE = 1.0


@dataclass(frozen=True)
class ServerSnapshot:
    """What a server reports to a deciding user."""

    server_id: int
    queue: Schedule
    busy_until: float
    capacity: float
    free_channels: int


@dataclass(frozen=True)
class CandidateVerdict:
    """Admission outcome for one candidate server.

    ``accepted`` is None when the candidate was never evaluated (no free
    channel or no usable link).
    """

    server_id: int
    free_channels: int
    rate_bps: float
    transmission_s: float
    accepted: bool | None
    predicted_completion: float | None


@dataclass(frozen=True)
class OffloadDecision:
    """One user-side server selection; ``chosen`` is None when the task was
    dropped."""

    event_index: int
    task_id: TaskId
    candidates: tuple[CandidateVerdict, ...]
    chosen: int | None


@dataclass
class OutageBreakdown:
    dropped_no_server: int = 0
    rejected_at_admission: int = 0
    evicted_on_reschedule: int = 0
    missed_in_execution: int = 0

    def total(self) -> int:
        return (
            self.dropped_no_server
            + self.rejected_at_admission
            + self.evicted_on_reschedule
            + self.missed_in_execution
        )


@dataclass
class RunMetrics:
    generated: int = 0
    served: int = 0
    breakdown: OutageBreakdown = field(default_factory=OutageBreakdown)
    events: int = 0
    decision_costs: list[float] = field(default_factory=list)
    reschedule_costs: list[float] = field(default_factory=list)

    @property
    def outages(self) -> int:
        return self.breakdown.total()


def service_ratio(metrics: RunMetrics) -> float:
    """Fraction of generated tasks served on time; 1.0 for an empty run."""
    if metrics.generated == 0:
        return 1.0
    return (metrics.generated - metrics.outages) / metrics.generated


@dataclass(frozen=True)
class RunResult:
    metrics: RunMetrics
    trace: tuple[dict, ...]
    decisions: tuple[OffloadDecision, ...]


class ServerState:
    """Mutable per-server simulation state.

    ``waiting`` holds fully transmitted tasks in execution order;
    ``in_progress`` is never in ``waiting`` and never preempted. Channel
    accounting: ``free_channels + reserved`` equals the configured channel
    count at all times.
    """

    def __init__(self, server_id: int, position: tuple[float, float], capacity: float, channels: int):
        self.id = server_id
        self.position = position
        self.capacity = capacity
        self.waiting: list[Task] = []
        self.in_progress: tuple[Task, float] | None = None
        self.free_channels = channels
        self.reserved = 0

    def busy_until(self, clock: float) -> float:
        return self.in_progress[1] if self.in_progress else clock

    def queue_at(self, clock: float) -> Schedule:
        return Schedule(
            base_time=max(clock, self.busy_until(clock)),
            accepted=tuple(self.waiting),
            rejected=frozenset(),
            capacity=self.capacity,
        )

    def snapshot(self, clock: float) -> ServerSnapshot:
        return ServerSnapshot(
            server_id=self.id,
            queue=self.queue_at(clock),
            busy_until=self.busy_until(clock),
            capacity=self.capacity,
            free_channels=self.free_channels,
        )


@dataclass(frozen=True)
class ArrivalOutcome:
    accepted: bool
    evicted: tuple[Task, ...]


class Discipline:
    """Per-scheduler queueing behavior shared by user-side admission and
    server-side queue maintenance."""

    name = ""
    # True when the waiting queue is kept feasible at all times, so the
    # head can always start immediately and finish before its deadline.
    maintains_feasibility = True

    def admit(self, snapshot: ServerSnapshot, task: Task, ready: float) -> tuple[bool, float | None]:
        raise NotImplementedError

    def join(self, server: ServerState, task: Task, base: float) -> ArrivalOutcome:
        raise NotImplementedError

    def pop_next(self, server: ServerState, now: float) -> tuple[Task | None, tuple[Task, ...]]:
        if not server.waiting:
            return None, ()
        return server.waiting.pop(0), ()


class _RescheduleDiscipline(Discipline):
    """Queue kept as the scheduler's accepted order; every join re-runs the
    batch scheduler over the union and may displace queued tasks."""

    def _reschedule(self, tasks: Sequence[Task], capacity: float, base: float) -> Schedule:
        raise NotImplementedError

    def admit(self, snapshot: ServerSnapshot, task: Task, ready: float) -> tuple[bool, float | None]:
        queued = snapshot.queue.accepted
        if not is_feasible_order(queued, snapshot.capacity, ready):
            return False, None
        plan = self._reschedule(list(queued) + [task], snapshot.capacity, ready)
        for position, kept in enumerate(plan.accepted):
            if kept.id == task.id:
                return True, completion_times(plan)[position]
        return False, None

    def join(self, server: ServerState, task: Task, base: float) -> ArrivalOutcome:
        plan = self._reschedule(list(server.waiting) + [task], server.capacity, base)
        kept_ids = {t.id for t in plan.accepted}
        evicted = tuple(t for t in server.waiting if t.id not in kept_ids)
        server.waiting = list(plan.accepted)
        if task.id not in kept_ids:
            return ArrivalOutcome(False, evicted)
        return ArrivalOutcome(True, evicted)


class OptimalDiscipline(_RescheduleDiscipline):
    """The proposed scheme with full re-scheduling on the user side too."""

    name = "optimal"

    def _reschedule(self, tasks, capacity, base):
        return schedule_optimal_fast(tasks, capacity, base)


class FodDiscipline(OptimalDiscipline):
    """The proposed scheme: constant-pass admission on the user side,
    optimal re-scheduling on the server side."""

    name = "fod"

    def admit(self, snapshot: ServerSnapshot, task: Task, ready: float) -> tuple[bool, float | None]:
        queued = snapshot.queue.accepted
        if not is_feasible_order(queued, snapshot.capacity, ready):
            return False, None
        verdict = fod_admit(snapshot.queue, task, snapshot.capacity, ready)
        return verdict.accepted, verdict.predicted_completion


class MooreDiscipline(_RescheduleDiscipline):
    name = "moore"

    def _reschedule(self, tasks, capacity, base):
        return moore_hodgson(tasks, capacity, base)


class DedasDiscipline(Discipline):
    """Insertion-only queueing: a task is slotted where it disturbs nobody
    and existing tasks are never displaced."""

    name = "dedas"

    def admit(self, snapshot: ServerSnapshot, task: Task, ready: float) -> tuple[bool, float | None]:
        queued = snapshot.queue.accepted
        if not is_feasible_order(queued, snapshot.capacity, ready):
            return False, None
        view = Schedule(ready, queued, frozenset(), snapshot.capacity)
        position = dedas_insert(view, task, ready)
        if position is None:
            return False, None
        order = list(queued)
        order.insert(position - 1, task)
        elapsed = ready
        for queued_task in order[:position]:
            elapsed += queued_task.cpu_cycles / snapshot.capacity
        return True, elapsed

    def join(self, server: ServerState, task: Task, base: float) -> ArrivalOutcome:
        view = Schedule(base, tuple(server.waiting), frozenset(), server.capacity)
        position = dedas_insert(view, task, base)
        if position is None:
            return ArrivalOutcome(False, ())
        server.waiting.insert(position - 1, task)
        return ArrivalOutcome(True, ())


class PriorityDiscipline(Discipline):
    """Plain priority queueing: every task is taken, the dispatch rule
    orders execution, and tasks that can no longer make their deadline are
    dropped when selected."""

    maintains_feasibility = False

    def __init__(self, policy: DispatchPolicy):
        self.policy = policy
        self.name = policy.kind

    def admit(self, snapshot: ServerSnapshot, task: Task, ready: float) -> tuple[bool, float | None]:
        backlog = sum(t.cpu_cycles for t in snapshot.queue.accepted)
        predicted = ready + (backlog + task.cpu_cycles) / snapshot.capacity
        return True, predicted

    def join(self, server: ServerState, task: Task, base: float) -> ArrivalOutcome:
        server.waiting.append(task)
        return ArrivalOutcome(True, ())

    def pop_next(self, server: ServerState, now: float) -> tuple[Task | None, tuple[Task, ...]]:
        chosen, dropped = next_task(self.policy, server.waiting, now, server.capacity)
        remove = {t.id for t in dropped}
        if chosen is not None:
            remove.add(chosen.id)
        if remove:
            server.waiting = [t for t in server.waiting if t.id not in remove]
        return chosen, dropped


def make_discipline(name: str, *, size_key: str = "cycles", drop_stale: bool = True) -> Discipline:
    if name == "optimal":
        return OptimalDiscipline()
    if name == "fod":
        return FodDiscipline()
    if name == "moore":
        return MooreDiscipline()
    if name == "dedas":
        return DedasDiscipline()
    if name in ("edf", "sdf", "dstar_s"):
        return PriorityDiscipline(DispatchPolicy(name, drop_stale=drop_stale, size_key=size_key))
    raise ConfigError(f"unknown scheduler {name!r}", field="scheduler")


def select_server(
    task: Task,
    snapshots: Sequence[ServerSnapshot],
    clock: float,
    rate_fn: Callable[[int], float],
    *,
    discipline: Discipline | None = None,
    force_offload: bool = False,
    event_index: int = 0,
) -> OffloadDecision:
    """Pick the candidate server promising the earliest completion among
    those that admit the task (ties to the lower server id).

    Candidates without a free channel are skipped. The admission clock for
    a candidate is the later of transmission finish and the server
    becoming free. With ``force_offload``, an all-reject round falls back
    to the earliest-estimate candidate that has a free channel instead of
    dropping.
    """
    if not snapshots:
        raise NoCoverageError("no candidate servers in range")
    if discipline is None:
        discipline = FodDiscipline()

    verdicts = []
    best: tuple[float, int] | None = None
    fallback: tuple[float, int] | None = None
    for snap in sorted(snapshots, key=lambda s: s.server_id):
        if snap.free_channels <= 0:
            verdicts.append(CandidateVerdict(snap.server_id, snap.free_channels, 0.0, 0.0, None, None))
            continue
        rate = rate_fn(snap.server_id)
        if rate <= 0:
            verdicts.append(CandidateVerdict(snap.server_id, snap.free_channels, rate, 0.0, None, None))
            continue
        tx = transmission_delay(task.data_size, rate)
        ready = max(clock + tx, snap.busy_until)
        accepted, predicted = discipline.admit(snap, task, ready)
        verdicts.append(
            CandidateVerdict(snap.server_id, snap.free_channels, rate, tx, accepted, predicted)
        )
        backlog = sum(t.cpu_cycles for t in snap.queue.accepted)
        estimate = predicted if predicted is not None else ready + (backlog + task.cpu_cycles) / snap.capacity
        if accepted and (best is None or (predicted, snap.server_id) < best):
            best = (predicted, snap.server_id)
        if fallback is None or (estimate, snap.server_id) < fallback:
            fallback = (estimate, snap.server_id)

    if best is not None:
        chosen = best[1]
    elif force_offload and fallback is not None:
        chosen = fallback[1]
    else:
        chosen = None
    return OffloadDecision(event_index, task.id, tuple(verdicts), chosen)


def server_on_arrival(
    server: ServerState, task: Task, clock: float, *, discipline: Discipline | None = None
) -> ArrivalOutcome:
    """Admit ``task`` into a server's queue at ``clock``, re-running the
    queue discipline from the later of the clock and the in-progress
    finish. Displaced tasks are returned; the in-progress task is never
    touched."""
    if discipline is None:
        discipline = OptimalDiscipline()
    base = max(clock, server.busy_until(clock))
    return discipline.join(server, task, base)


class _Engine:
    def __init__(self, config: RunConfig, seed: int, *, strict: bool, collect_trace: bool):
        self.cfg = config
        self.seed = seed
        self.strict = strict
        self.collect_trace = collect_trace
        self.discipline = make_discipline(
            config.scheduler, size_key=config.size_key, drop_stale=config.drop_stale
        )
        self.radio = RadioConfig(
            total_bandwidth=config.radio.bandwidth_hz,
            num_servers=config.num_servers,
            channels_per_server=config.radio.channels_per_server,
            tx_power=config.radio.tx_power_w,
            noise_psd=config.radio.noise_psd,
            pathloss_exponent=config.radio.pathloss_exponent,
        )
        self.metrics = RunMetrics()
        self.trace: list[dict] = []
        self.decisions: list[OffloadDecision] = []
        self._seq = itertools.count()
        self._heap: list = []
        self._place()
        self._schedule_arrivals()
        self._schedule_mobility()

    # -- setup ---------------------------------------------------------

    def _place(self) -> None:
        cfg = self.cfg
        rng = substream(self.seed, "layout")
        width, height = cfg.area
        positions = [(rng.uniform(0.0, width), rng.uniform(0.0, height)) for _ in range(cfg.num_servers)]
        capacities = [rng.uniform(*cfg.capacity_range) for _ in range(cfg.num_servers)]
        self.servers = [
            ServerState(e, positions[e], capacities[e], cfg.radio.channels_per_server)
            for e in range(cfg.num_servers)
        ]
        self.motion: list[UserMotionState] = []
        for _ in range(cfg.num_users):
            for _attempt in range(10000):
                pos = (rng.uniform(0.0, width), rng.uniform(0.0, height))
                nearby = sum(
                    1 for p in positions if math.dist(p, pos) <= cfg.coverage_radius
                )
                if nearby >= cfg.min_coverage:
                    break
            else:
                raise ConfigError(
                    "could not place a user with enough servers in coverage range"
                )
            self.motion.append(
                UserMotionState(
                    position=pos,
                    heading=0.0,
                    speed=cfg.speed,
                    turn_probability=cfg.turn_prob,
                    area=cfg.area,
                )
            )
        self.mobility_rngs = [substream(self.seed, "mobility", k) for k in range(cfg.num_users)]

    def _schedule_arrivals(self) -> None:
        cfg = self.cfg
        for user in range(cfg.num_users):
            rng = substream(self.seed, "tasks", user)
            clock = 0.0
            seq = 0
            while True:
                clock += rng.expovariate(cfg.arrival_rate)
                if clock > cfg.horizon:
                    break
                seq += 1
                task = Task(
                    id=(user, seq),
                    arrival_time=clock,
                    cpu_cycles=rng.expovariate(1.0 / cfg.mean_cycles),
                    deadline=clock + rng.uniform(*cfg.deadline_range),
                    data_size=rng.uniform(*cfg.data_size_range),
                    origin_user=user,
                )
                self._push(clock, ARRIVAL, task)

    def _schedule_mobility(self) -> None:
        if self.cfg.num_users == 0:
            return
        ticks = int(self.cfg.horizon / self.cfg.delta + 1e-9)
        for i in range(1, ticks + 1):
            self._push(i * self.cfg.delta, MOBILITY, None)

    def _push(self, when: float, kind: int, payload) -> None:
        heapq.heappush(self._heap, (when, kind, next(self._seq), payload))

    # -- helpers -------------------------------------------------------

    def _emit(self, t: float, kind: str, task: Task | None, server: int | None, verdict: str, **extra) -> None:
        if not self.collect_trace:
            return
        record = {
            "t": round(t, 9),
            "kind": kind,
            "task": format_task_id(task.id) if task else None,
            "server": server,
            "verdict": verdict,
        }
        record.update(extra)
        self.trace.append(record)

    def _rate_fn(self, user: int, clock: float) -> Callable[[int], float]:
        slot = int(clock / self.cfg.delta)
        position = self.motion[user].position
        pathloss = self.cfg.radio.pathloss_exponent

        def rate(server_id: int) -> float:
            distance = max(math.dist(position, self.servers[server_id].position), MIN_LINK_DISTANCE)
            fading = sample_fading(substream(self.seed, "fading", user, server_id, slot))
            gain = channel_gain(ChannelDraw(fading, distance), pathloss)
            return achievable_rate(gain, self.radio)

        return rate

    def _start_next(self, server: ServerState, now: float) -> None:
        while server.in_progress is None:
            task, dropped = self.discipline.pop_next(server, now)
            for stale in dropped:
                self.metrics.breakdown.missed_in_execution += 1
                self._emit(now, "drop", stale, server.id, "missed")
            if task is None:
                return
            finish = now + task.cpu_cycles / server.capacity
            server.in_progress = (task, finish)
            self._push(finish, EXEC_DONE, (server.id, task))

    # -- event handlers ------------------------------------------------

    def _on_arrival(self, clock: float, task: Task) -> None:
        cfg = self.cfg
        self.metrics.generated += 1
        user = task.origin_user
        position = self.motion[user].position
        by_distance = sorted(
            range(cfg.num_servers),
            key=lambda e: (math.dist(position, self.servers[e].position), e),
        )
        snapshots = [self.servers[e].snapshot(clock) for e in by_distance[: cfg.nearest_servers]]
        rate_fn = self._rate_fn(user, clock)

        started = time.perf_counter()
        decision = select_server(
            task,
            snapshots,
            clock,
            rate_fn,
            discipline=self.discipline,
            force_offload=cfg.force_offload,
            event_index=self.metrics.events,
        )
        self.metrics.decision_costs.append(time.perf_counter() - started)
        self.decisions.append(decision)

        if decision.chosen is None:
            self.metrics.breakdown.dropped_no_server += 1
            self._emit(clock, "arrival", task, None, "dropped_no_server")
            return
        server = self.servers[decision.chosen]
        server.free_channels -= 1
        server.reserved += 1
        tx = next(v.transmission_s for v in decision.candidates if v.server_id == decision.chosen)
        self._emit(clock, "arrival", task, server.id, "offloaded")
        self._push(clock + tx, TRANS_DONE, (server.id, task))

    def _on_transmit_done(self, clock: float, server_id: int, task: Task) -> None:
        server = self.servers[server_id]
        server.reserved -= 1
        server.free_channels += 1

        started = time.perf_counter()
        outcome = server_on_arrival(server, task, clock, discipline=self.discipline)
        self.metrics.reschedule_costs.append(time.perf_counter() - started)

        for victim in outcome.evicted:
            self.metrics.breakdown.evicted_on_reschedule += 1
            self._emit(clock, "evict", victim, server_id, "evicted")
        if outcome.accepted:
            self._emit(clock, "transmit_done", task, server_id, "queued")
        else:
            self.metrics.breakdown.rejected_at_admission += 1
            self._emit(clock, "transmit_done", task, server_id, "rejected")
        if server.in_progress is None:
            self._start_next(server, clock)

    def _on_exec_done(self, clock: float, server_id: int, task: Task) -> None:
        server = self.servers[server_id]
        server.in_progress = None
        if clock <= task.deadline:
            self.metrics.served += 1
            self._emit(clock, "exec_done", task, server_id, "served")
        else:
            self.metrics.breakdown.missed_in_execution += 1
            self._emit(clock, "exec_done", task, server_id, "missed")
        self._start_next(server, clock)

    def _on_mobility(self, clock: float) -> None:
        for k in range(self.cfg.num_users):
            self.motion[k] = mobility_step(self.motion[k], self.cfg.delta, self.mobility_rngs[k])
        self._emit(clock, "mobility", None, None, "moved")

    # -- invariants ----------------------------------------------------

    def _check_invariants(self, clock: float) -> None:
        channels = self.cfg.radio.channels_per_server
        for server in self.servers:
            assert server.reserved >= 0 and server.free_channels >= 0
            assert server.free_channels + server.reserved == channels, "channel accounting broke"
            assert not (server.in_progress is None and server.waiting), "idle server with waiting work"
            if server.in_progress is not None:
                assert all(t.id != server.in_progress[0].id for t in server.waiting)
            if self.discipline.maintains_feasibility:
                base = max(clock, server.busy_until(clock))
                assert is_feasible_order(server.waiting, server.capacity, base), "queue lost feasibility"

    # -- main loop -----------------------------------------------------

    def run(self) -> RunResult:
        while self._heap:
            when, kind, _seq, payload = heapq.heappop(self._heap)
            self.metrics.events += 1
            if kind == ARRIVAL:
                self._on_arrival(when, payload)
            elif kind == TRANS_DONE:
                self._on_transmit_done(when, payload[0], payload[1])
            elif kind == EXEC_DONE:
                self._on_exec_done(when, payload[0], payload[1])
            else:
                self._on_mobility(when)
            if self.strict:
                self._check_invariants(when)

        leftover = self.metrics.generated - self.metrics.served - self.metrics.outages
        assert leftover == 0, f"unaccounted tasks: {leftover}"
        assert len(self.decisions) == self.metrics.generated
        return RunResult(self.metrics, tuple(self.trace), tuple(self.decisions))


def run(
    config: RunConfig,
    seed: int | None = None,
    *,
    strict: bool = False,
    collect_trace: bool | None = None,
) -> RunResult:
    """Simulate one run to completion (arrivals stop at the horizon, queues
    drain afterwards). Identical (config, seed) pairs give identical
    results."""
    if seed is None:
        seed = config.seed
    if collect_trace is None:
        collect_trace = config.trace
    engine = _Engine(config, seed, strict=strict, collect_trace=collect_trace)
    return engine.run()
