"""Command-line front end.

Subcommands: ``schedule`` runs a batch scheduler over a task CSV,
``simulate`` executes (sweep) simulation runs and emits CSV/SVG reports,
``bench`` measures per-arrival scheduling cost, ``oracle-check``
cross-checks the optimizer against brute force, and ``config --dump``
prints the built-in defaults.

Exit codes: 0 success, 1 data error, 2 usage error. All outputs are
byte-deterministic given (flags, config, seed) except wall-clock timing
columns, which live in their own files.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .admission import fod_admit
from .errors import EdgeSchedError
from .model import Schedule, Task, completion_times, format_task_id, read_tasks_csv
from .oracle import PERMUTATION_CAP, oracle_max_served, oracle_max_served_permutations
from .sched_baselines import DispatchPolicy, moore_hodgson, next_task
from .sched_core import schedule_optimal, schedule_optimal_fast
from .sim import RunResult, run as run_simulation, service_ratio
from .svgplot import line_chart
from .workload_config import (
    RunConfig,
    apply_sweep_value,
    dump_default_toml,
    gen_batch_instance,
    load_config,
    substream,
)

BATCH_SCHEDULERS = ("optimal", "fast", "moore", "edf", "sdf", "dstar_s")
BENCH_SCHEDULERS = ("fod", "fast", "moore", "reference")

SCHEDULE_CSV_FIELDS = ("position", "id", "start_s", "finish_s", "deadline_s", "status")
METRICS_CSV_FIELDS = (
    "scheduler",
    "sweep",
    "value",
    "seed",
    "generated",
    "served",
    "outages",
    "dropped_no_server",
    "rejected_at_admission",
    "evicted_on_reschedule",
    "missed_in_execution",
    "events",
    "service_ratio",
)
TIMINGS_CSV_FIELDS = (
    "scheduler",
    "sweep",
    "value",
    "seed",
    "decision_events",
    "reschedule_events",
    "decision_mean_s",
    "reschedule_mean_s",
    "per_arrival_mean_s",
)

BENCH_CAPACITY = 1e9


def _resolve_seed(flag: int | None, file_seed: int | None = None) -> int:
    """Seed precedence: --seed flag, then EDGESCHED_SEED, then the config
    file, then 0."""
    if flag is not None:
        return flag
    env = os.environ.get("EDGESCHED_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"EDGESCHED_SEED must be an integer, got {env!r}") from None
    if file_seed is not None:
        return file_seed
    return 0


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# -- schedule ------------------------------------------------------------


def _dispatch_batch(
    name: str, tasks: Sequence[Task], capacity: float, base: float
) -> tuple[list[tuple[Task, float, float]], list[Task]]:
    """Run one batch scheduler; returns (placed rows, rejected tasks)."""
    if name in ("optimal", "fast", "moore"):
        fn = {"optimal": schedule_optimal, "fast": schedule_optimal_fast, "moore": moore_hodgson}[name]
        plan = fn(list(tasks), capacity, base)
        finishes = completion_times(plan)
        placed = []
        clock = base
        for task, finish in zip(plan.accepted, finishes):
            placed.append((task, clock, finish))
            clock = finish
        return placed, sorted(plan.rejected, key=lambda t: t.id)

    policy = DispatchPolicy(name, drop_stale=True)
    remaining = list(tasks)
    clock = base
    placed = []
    rejected = []
    while remaining:
        chosen, dropped = next_task(policy, remaining, clock, capacity)
        gone = {t.id for t in dropped}
        if chosen is not None:
            gone.add(chosen.id)
        if not gone:
            break
        remaining = [t for t in remaining if t.id not in gone]
        rejected.extend(dropped)
        if chosen is not None:
            finish = clock + chosen.cpu_cycles / capacity
            placed.append((chosen, clock, finish))
            clock = finish
    return placed, sorted(rejected, key=lambda t: t.id)


def cmd_schedule(args: argparse.Namespace) -> int:
    if args.tasks == "-":
        tasks = read_tasks_csv(sys.stdin)
    else:
        with open(args.tasks, encoding="utf-8", newline="") as stream:
            tasks = read_tasks_csv(stream)
    capacity = args.capacity_ghz * 1e9
    placed, rejected = _dispatch_batch(args.scheduler, tasks, capacity, args.base_time)

    stream, owned = _open_out(args.out)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(SCHEDULE_CSV_FIELDS)
        for position, (task, start, finish) in enumerate(placed, start=1):
            writer.writerow(
                (position, format_task_id(task.id), repr(start), repr(finish), repr(task.deadline), "served")
            )
        for task in rejected:
            writer.writerow(("", format_task_id(task.id), "", "", repr(task.deadline), "rejected"))
    finally:
        if owned:
            stream.close()
    return 0


# -- simulate ------------------------------------------------------------


@dataclass(frozen=True)
class _Replication:
    scheduler: str
    sweep: str
    value: float | None
    seed: int
    config: RunConfig


def _replication_row(rep: _Replication, result: RunResult) -> dict:
    m = result.metrics
    return {
        "scheduler": rep.scheduler,
        "sweep": rep.sweep,
        "value": "" if rep.value is None else repr(rep.value),
        "seed": rep.seed,
        "generated": m.generated,
        "served": m.served,
        "outages": m.outages,
        "dropped_no_server": m.breakdown.dropped_no_server,
        "rejected_at_admission": m.breakdown.rejected_at_admission,
        "evicted_on_reschedule": m.breakdown.evicted_on_reschedule,
        "missed_in_execution": m.breakdown.missed_in_execution,
        "events": m.events,
        "service_ratio": repr(service_ratio(m)),
    }


def _timing_row(rep: _Replication, result: RunResult) -> dict:
    m = result.metrics
    decision = m.decision_costs
    resched = m.reschedule_costs
    per_arrival = (sum(decision) + sum(resched)) / m.generated if m.generated else 0.0
    return {
        "scheduler": rep.scheduler,
        "sweep": rep.sweep,
        "value": "" if rep.value is None else repr(rep.value),
        "seed": rep.seed,
        "decision_events": len(decision),
        "reschedule_events": len(resched),
        "decision_mean_s": repr(statistics.fmean(decision) if decision else 0.0),
        "reschedule_mean_s": repr(statistics.fmean(resched) if resched else 0.0),
        "per_arrival_mean_s": repr(per_arrival),
    }


def _run_replication(rep: _Replication) -> RunResult:
    return run_simulation(rep.config, rep.seed)


def _plan_replications(config: RunConfig, seed_flag: int | None) -> list[_Replication]:
    exp = config.experiment
    if exp is None:
        seed = _resolve_seed(seed_flag, config.seed)
        return [_Replication(config.scheduler, "", None, seed, replace(config, seed=seed))]
    shift = _resolve_seed(seed_flag, 0)
    reps = []
    for scheduler in exp.schedulers:
        for value in exp.values:
            pinned = apply_sweep_value(config, exp.sweep, value)
            for rep_seed in exp.seeds:
                seed = rep_seed + shift
                reps.append(
                    _Replication(
                        scheduler,
                        exp.sweep,
                        value,
                        seed,
                        replace(pinned, scheduler=scheduler, seed=seed, experiment=None),
                    )
                )
    return reps


def _trace_filename(rep: _Replication, single: bool) -> str:
    if single:
        return "trace.jsonl"
    return f"trace_{rep.scheduler}_{rep.value:g}_{rep.seed}.jsonl"


def _write_plots(out_dir: Path, config: RunConfig, reps, results) -> None:
    exp = config.experiment
    values = list(exp.values)
    ratio_series: dict[str, tuple[list[float], list[float]]] = {}
    cost_series: dict[str, tuple[list[float], list[float]]] = {}
    for scheduler in exp.schedulers:
        ratios, costs = [], []
        for value in values:
            picked = [
                res
                for rep, res in zip(reps, results)
                if rep.scheduler == scheduler and rep.value == value
            ]
            ratios.append(statistics.fmean(service_ratio(r.metrics) for r in picked))
            costs.append(
                statistics.fmean(
                    (sum(r.metrics.decision_costs) + sum(r.metrics.reschedule_costs))
                    / max(r.metrics.generated, 1)
                    for r in picked
                )
            )
        ratio_series[scheduler] = (values, ratios)
        cost_series[scheduler] = (values, costs)
    (out_dir / "service_ratio.svg").write_text(
        line_chart(
            ratio_series,
            title="Service ratio",
            x_label=exp.sweep,
            y_label="service ratio",
            y_range=(0.0, 1.02),
        ),
        encoding="utf-8",
    )
    (out_dir / "scheduling_cost.svg").write_text(
        line_chart(
            cost_series,
            title="Mean scheduling cost per arrival",
            x_label=exp.sweep,
            y_label="seconds",
        ),
        encoding="utf-8",
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    reps = _plan_replications(config, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.jobs > 1 and len(reps) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_replication, reps))
    else:
        results = [_run_replication(rep) for rep in reps]

    with open(out_dir / "metrics.csv", "w", encoding="utf-8", newline="") as stream:
        writer = csv.DictWriter(stream, METRICS_CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for rep, result in zip(reps, results):
            writer.writerow(_replication_row(rep, result))
    with open(out_dir / "timings.csv", "w", encoding="utf-8", newline="") as stream:
        writer = csv.DictWriter(stream, TIMINGS_CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for rep, result in zip(reps, results):
            writer.writerow(_timing_row(rep, result))

    if config.trace:
        single = config.experiment is None
        for rep, result in zip(reps, results):
            with open(out_dir / _trace_filename(rep, single), "w", encoding="utf-8") as stream:
                for record in result.trace:
                    stream.write(json.dumps(record, sort_keys=True) + "\n")

    if config.experiment is not None:
        _write_plots(out_dir, config, reps, results)

    total = sum(r.metrics.generated for r in results)
    print(f"simulate: {len(reps)} run(s), {total} tasks -> {out_dir / 'metrics.csv'}")
    return 0


# -- bench ---------------------------------------------------------------


@dataclass(frozen=True)
class BenchReport:
    """Per-arrival scheduling cost against pre-built queues of each size."""

    scheduler: str
    n_values: tuple[int, ...]
    mean_s: tuple[float, ...]
    median_s: tuple[float, ...]
    p95_s: tuple[float, ...]
    growth_ratios: tuple[float, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n values must be strictly increasing")
        if any(c < 0 for seq in (self.mean_s, self.median_s, self.p95_s) for c in seq):
            raise ValueError("costs must be nonnegative")


def _bench_queue(n: int, seed: int) -> list[Task]:
    """A deadline-sorted queue of n tasks, feasible at time 0 with slack to
    spare, so one more arrival never evicts anything."""
    rng = substream("bench", seed, n)
    tasks = []
    elapsed = 0.0
    for seq in range(1, n + 1):
        cycles = rng.uniform(0.5e9, 1.5e9)
        elapsed += cycles / BENCH_CAPACITY
        tasks.append(
            Task(
                id=(0, seq),
                arrival_time=0.0,
                cpu_cycles=cycles,
                deadline=elapsed + 5.0,
                data_size=1e6,
                origin_user=0,
            )
        )
    return tasks


def _bench_probe() -> Task:
    # Heavier than every queued task, so the admission test cannot stop
    # early, and a far-off deadline, so the probe is accepted.
    return Task(id=(1, 1), arrival_time=0.0, cpu_cycles=2e9, deadline=1e9, data_size=1e6, origin_user=1)


def bench_scheduler(scheduler: str, n_values: Sequence[int], reps: int, seed: int) -> BenchReport:
    """Measure one admission event against queues of each size with a
    monotonic high-resolution clock; three warm-up rounds are discarded."""
    if scheduler not in BENCH_SCHEDULERS:
        raise ValueError(f"unknown bench scheduler {scheduler!r}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    probe = _bench_probe()
    means, medians, p95s = [], [], []
    for n in n_values:
        queue = _bench_queue(n, seed)
        union = queue + [probe]
        view = Schedule(0.0, tuple(queue), frozenset(), BENCH_CAPACITY)
        samples = []
        for rep in range(reps + 3):
            if scheduler == "fod":
                start = time.perf_counter()
                fod_admit(view, probe, BENCH_CAPACITY, 0.0)
                cost = time.perf_counter() - start
            elif scheduler == "fast":
                start = time.perf_counter()
                schedule_optimal_fast(union, BENCH_CAPACITY, 0.0)
                cost = time.perf_counter() - start
            elif scheduler == "moore":
                start = time.perf_counter()
                moore_hodgson(union, BENCH_CAPACITY, 0.0)
                cost = time.perf_counter() - start
            else:
                start = time.perf_counter()
                schedule_optimal(union, BENCH_CAPACITY, 0.0)
                cost = time.perf_counter() - start
            if rep >= 3:
                samples.append(cost)
        means.append(statistics.fmean(samples))
        medians.append(statistics.median(samples))
        p95s.append(
            statistics.quantiles(samples, n=20)[18] if len(samples) >= 2 else samples[0]
        )
    ratios = tuple(b / a for a, b in zip(medians, medians[1:]))
    return BenchReport(scheduler, tuple(n_values), tuple(means), tuple(medians), tuple(p95s), ratios)


def cmd_bench(args: argparse.Namespace) -> int:
    n_values = sorted(set(args.n))
    seed = _resolve_seed(args.seed)
    report = bench_scheduler(args.scheduler, n_values, args.reps, seed)
    stream, owned = _open_out(args.out)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(("scheduler", "n", "reps", "mean_s", "median_s", "p95_s", "ratio_vs_prev"))
        for i, n in enumerate(report.n_values):
            ratio = repr(report.growth_ratios[i - 1]) if i > 0 else ""
            writer.writerow(
                (
                    report.scheduler,
                    n,
                    args.reps,
                    repr(report.mean_s[i]),
                    repr(report.median_s[i]),
                    repr(report.p95_s[i]),
                    ratio,
                )
            )
    finally:
        if owned:
            stream.close()
    return 0


# -- oracle-check --------------------------------------------------------


def cmd_oracle_check(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    capacity = args.capacity_ghz * 1e9
    checked = 0
    for i in range(args.instances):
        rng = substream("oracle-check", seed, i)
        n = rng.randint(0, args.max_tasks)
        tasks = gen_batch_instance(n, seed * 100003 + i)
        plan = schedule_optimal(tasks, capacity, 0.0)
        best = oracle_max_served(tasks, capacity, 0.0)
        if len(plan.accepted) != best.max_served:
            print(
                f"mismatch at instance {i}: scheduler kept {len(plan.accepted)}, "
                f"oracle found {best.max_served}",
                file=sys.stderr,
            )
            return 1
        if args.permutation and n <= PERMUTATION_CAP:
            perm = oracle_max_served_permutations(tasks, capacity, 0.0)
            if perm.max_served != best.max_served:
                print(f"oracle disagreement at instance {i}", file=sys.stderr)
                return 1
        checked += 1
    print(f"oracle-check: {checked} instances agree (max n {args.max_tasks})")
    return 0


# -- config --------------------------------------------------------------


def cmd_config(args: argparse.Namespace) -> int:
    if not args.dump:
        print("error: config requires --dump", file=sys.stderr)
        return 2
    sys.stdout.write(dump_default_toml())
    return 0


# -- parser --------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgesched",
        description="Deadline-aware task offloading: schedulers, simulator, benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="run a batch scheduler over a task CSV")
    p.add_argument("tasks", help="task CSV path, or - for stdin")
    p.add_argument("--scheduler", default="optimal", choices=BATCH_SCHEDULERS)
    p.add_argument("--capacity-ghz", type=float, default=1.0, help="server capacity in GHz")
    p.add_argument("--base-time", type=float, default=0.0, help="queue start time in seconds")
    p.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="run simulations from a config file")
    p.add_argument("--config", required=True, help="TOML or JSON config path")
    p.add_argument("--seed", type=int, default=None, help="seed override (else EDGESCHED_SEED, else config)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel replications")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="measure per-arrival scheduling cost")
    p.add_argument("--scheduler", default="fod", choices=BENCH_SCHEDULERS)
    p.add_argument("--n", type=int, nargs="+", default=[1000, 2000, 4000], help="queue sizes")
    p.add_argument("--reps", type=int, default=20, help="measured repetitions per size")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="-", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle-check", help="cross-check the optimizer against brute force")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--max-tasks", type=int, default=10)
    p.add_argument("--capacity-ghz", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--permutation", action="store_true", help="also cross-check the permutation oracle")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("config", help="configuration helpers")
    p.add_argument("--dump", action="store_true", help="print the default config as TOML")
    p.set_defaults(func=cmd_config)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EdgeSchedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
