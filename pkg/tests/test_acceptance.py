"""End-to-end acceptance gates.

Each test is one numbered criterion and prints a single PASS line with the
measured quantities when it succeeds. Sweep tests drive the CLI against
the configs shipped in configs/ and analyze the emitted metrics.
"""

import csv
import random
import statistics
import time
from collections import defaultdict
from pathlib import Path

from conftest import (
    GOLDEN,
    GOLDEN_CAPACITY,
    grid_instance,
    make_task,
    smooth_instance,
    spearman,
)
from edgesched.admission import fod_admit
from edgesched.cli import bench_scheduler, main
from edgesched.model import write_tasks_csv
from edgesched.oracle import oracle_max_served, oracle_max_served_permutations
from edgesched.sched_baselines import DispatchPolicy, moore_hodgson, next_task
from edgesched.sched_core import schedule_optimal, schedule_optimal_fast
from edgesched.sim import run as run_simulation
from edgesched.workload_config import (
    BatchParams,
    config_from_dict,
    gen_batch_instance,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
TOLERANCE = 0.01


def make_golden():
    return [make_task(seq, cycles, deadline) for seq, cycles, deadline in GOLDEN]


def mixed_instance(seed, n):
    if seed % 2:
        return grid_instance(3000 + seed, n)
    return smooth_instance(4000 + seed, n)


def sweep_means(config_path, out_dir):
    """Run one experiment config through the CLI; mean service ratio per
    (scheduler, sweep value)."""
    assert main(["simulate", "--config", str(config_path), "--out", str(out_dir)]) == 0
    cells = defaultdict(list)
    with open(Path(out_dir) / "metrics.csv") as stream:
        for row in csv.DictReader(stream):
            cells[(row["scheduler"], float(row["value"]))].append(
                float(row["service_ratio"])
            )
    schedulers = sorted({s for s, _ in cells})
    values = sorted({v for _, v in cells})
    return {
        s: [statistics.fmean(cells[(s, v)]) for v in values] for s in schedulers
    }, values


def assert_dominant(means, proposed="fod"):
    for scheduler, series in means.items():
        if scheduler == proposed:
            continue
        for point, (ours, theirs) in enumerate(zip(means[proposed], series)):
            assert ours >= theirs - TOLERANCE, (scheduler, point, ours, theirs)


def test_criterion_01_golden_example(tmp_path, capsys):
    tasks = make_golden()
    with open(tmp_path / "tasks.csv", "w", newline="") as stream:
        write_tasks_csv(stream, tasks)
    assert main(["schedule", str(tmp_path / "tasks.csv")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split(",")[1] for line in lines[1:5]] == ["0:5", "0:4", "0:1", "0:3"]
    assert lines[5].split(",")[1] == "0:2"
    assert lines[5].endswith("rejected")

    schedule_optimal(tasks, GOLDEN_CAPACITY)  # warm up
    best = min(
        _timed(lambda: schedule_optimal(tasks, GOLDEN_CAPACITY)) for _ in range(5)
    )
    assert best < 1e-3, f"{best * 1e6:.0f} us"
    plan = schedule_optimal(tasks, GOLDEN_CAPACITY)
    assert [t.id[1] for t in plan.accepted] == [5, 4, 1, 3]
    assert {t.id[1] for t in plan.rejected} == {2}
    print(f"PASS criterion 1: accepted [5,4,1,3], rejected {{2}}, {best * 1e6:.0f} us")


def _timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def test_criterion_02_matches_exhaustive_optimum():
    start = time.perf_counter()
    agreements = 0
    for case in range(1000):
        n = random.Random(case).randint(0, 12)
        tasks = mixed_instance(case, n)
        served = len(schedule_optimal(tasks, 1.0).accepted)
        assert served == oracle_max_served(tasks, 1.0).max_served, case
        agreements += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    print(f"PASS criterion 2: {agreements}/1000 optimal counts, {elapsed:.1f} s")


def test_criterion_03_oracles_agree():
    agreements = 0
    for case in range(500):
        n = random.Random(10_000 + case).randint(0, 7)
        tasks = mixed_instance(10_000 + case, n)
        by_subset = oracle_max_served(tasks, 1.0)
        by_perm = oracle_max_served_permutations(tasks, 1.0)
        assert by_subset.max_served == by_perm.max_served, case
        assert [t.id for t in by_subset.witness] == [t.id for t in by_perm.witness]
        agreements += 1
    print(f"PASS criterion 3: {agreements}/500 oracle agreements")


def test_criterion_04_admission_equals_membership():
    accepts = rejects = 0
    for case in range(1000):
        rng = random.Random(7700 + case)
        n = rng.randint(0, 14)
        if case % 2 == 0:
            inst = grid_instance(31_000 + case, n, work_hi=4, deadline_hi=max(n, 2))
            probe = make_task(999, rng.randint(1, 4), rng.randint(1, max(n, 2)), user=1)
        else:
            inst = smooth_instance(32_000 + case, n)
            probe = make_task(
                999, rng.expovariate(1.0), rng.uniform(0.25, max(0.35 * n, 1.0)), user=1
            )
        queue = schedule_optimal(inst, 1.0, 0.0)
        verdict = fod_admit(queue, probe, 1.0, 0.0)
        rerun = schedule_optimal(list(queue.accepted) + [probe], 1.0, 0.0)
        member = any(t.id == probe.id for t in rerun.accepted)
        assert verdict.accepted == member, case
        accepts += member
        rejects += not member
    assert accepts >= 100 and rejects >= 100
    print(f"PASS criterion 4: 1000/1000 verdicts ({accepts} accepts, {rejects} rejects)")


def test_criterion_05_fast_variant_identity():
    for case in range(1000):
        n = random.Random(20_000 + case).randint(0, 40)
        if case < 500:
            tasks = grid_instance(21_000 + case, n, work_hi=6)
        else:
            tasks = smooth_instance(22_000 + case, n)
        assert schedule_optimal_fast(tasks, 1.0) == schedule_optimal(tasks, 1.0), case
    print("PASS criterion 5: 1000/1000 identical schedules")


def _policy_outages(tasks, kind, capacity):
    policy = DispatchPolicy(kind, drop_stale=True)
    pending = list(tasks)
    clock = 0.0
    served = 0
    while pending:
        chosen, dropped = next_task(policy, pending, clock, capacity)
        gone = {t.id for t in dropped}
        if chosen is not None:
            gone.add(chosen.id)
        if not gone:
            break
        pending = [t for t in pending if t.id not in gone]
        if chosen is not None:
            clock += chosen.cpu_cycles / capacity
            served += 1
    return len(tasks) - served


def test_criterion_06_outage_counts_on_a_batch_stream():
    capacity = 4e9
    params = BatchParams(mean_cycles=200e6, deadline_range=(0.5, 33.0))
    totals = defaultdict(int)
    for batch in range(10):
        tasks = gen_batch_instance(1000, 1000 + batch, params)
        ours = 1000 - len(schedule_optimal(tasks, capacity, 0.0).accepted)
        pruned = 1000 - len(moore_hodgson(tasks, capacity, 0.0).accepted)
        assert ours == pruned, batch  # both serve the optimum, per batch
        totals["optimal"] += ours
        for kind in ("edf", "sdf", "dstar_s"):
            totals[kind] += _policy_outages(tasks, kind, capacity)
    assert 500 <= totals["optimal"] <= 2000
    margins = {}
    for kind in ("edf", "sdf", "dstar_s"):
        margins[kind] = totals[kind] / totals["optimal"]
        assert margins[kind] >= 1.05, (kind, margins[kind])
    summary = ", ".join(f"{k} {v:.2f}x" for k, v in margins.items())
    print(f"PASS criterion 6: optimal {totals['optimal']}/10000 outages; {summary}")


def test_criterion_07_capacity_sweep(tmp_path):
    start = time.perf_counter()
    means, values = sweep_means(CONFIGS / "desk_capacity.toml", tmp_path / "cap")
    elapsed = time.perf_counter() - start
    correlations = {}
    for scheduler, series in means.items():
        correlations[scheduler] = spearman(values, series)
        assert correlations[scheduler] >= 0.9, (scheduler, correlations[scheduler])
    assert_dominant(means)
    assert elapsed < 300.0
    worst = min(correlations.values())
    print(
        f"PASS criterion 7: monotone in capacity (min rho {worst:.2f}), "
        f"proposed within {TOLERANCE} of the best everywhere, {elapsed:.0f} s"
    )


def test_criterion_08_user_and_candidate_sweeps(tmp_path):
    user_means, _ = sweep_means(CONFIGS / "desk_users.toml", tmp_path / "users")
    assert_dominant(user_means)
    declines = {
        scheduler: series[0] - series[-1] for scheduler, series in user_means.items()
    }
    assert declines["fod"] < declines["edf"]
    assert declines["fod"] < declines["sdf"]

    nearest_means, _ = sweep_means(CONFIGS / "desk_nearest.toml", tmp_path / "nearest")
    assert_dominant(nearest_means)
    print(
        f"PASS criterion 8: dominant on both sweeps; load decline "
        f"fod {declines['fod']:.3f} < edf {declines['edf']:.3f}, "
        f"sdf {declines['sdf']:.3f}"
    )


def test_criterion_09_scheduling_cost_growth():
    sizes = [1000, 2000, 4000]
    ratios = {}
    for scheduler in ("fod", "fast", "moore"):
        report = bench_scheduler(scheduler, sizes, reps=40, seed=0)
        ratios[scheduler] = report.growth_ratios
        assert all(r <= 3.0 for r in report.growth_ratios), (scheduler, report.growth_ratios)
    reference = bench_scheduler("reference", sizes, reps=20, seed=0)
    ratios["reference"] = reference.growth_ratios
    assert all(3.0 <= r <= 6.0 for r in reference.growth_ratios), reference.growth_ratios
    summary = "; ".join(
        f"{name} {', '.join(f'{r:.2f}' for r in rs)}" for name, rs in ratios.items()
    )
    print(f"PASS criterion 9: growth ratios {summary}")


def test_criterion_10_byte_determinism(tmp_path):
    for out in ("first", "second"):
        assert main(
            ["simulate", "--config", str(CONFIGS / "smoke.toml"), "--out", str(tmp_path / out)]
        ) == 0
    metrics_a = (tmp_path / "first/metrics.csv").read_bytes()
    metrics_b = (tmp_path / "second/metrics.csv").read_bytes()
    trace_a = (tmp_path / "first/trace.jsonl").read_bytes()
    trace_b = (tmp_path / "second/trace.jsonl").read_bytes()
    assert metrics_a == metrics_b
    assert trace_a == trace_b
    print(
        f"PASS criterion 10: {len(metrics_a)} metric bytes and "
        f"{len(trace_a)} trace bytes identical across reruns"
    )


def test_criterion_11_invariant_fuzz():
    raw = {
        "area_m": [2000.0, 2000.0],
        "num_servers": 6,
        "num_users": 30,
        "arrival_rate_per_s": 3.0,
        "mean_cycles": 2.0e9,
        "capacity_ghz": [10.0, 15.0],
        "data_size_kb": [50.0, 800.0],
        "deadline_s": [0.5, 4.0],
        "nearest_servers": 4,
        "horizon_s": 60.0,
        "min_coverage": 2,
        "coverage_radius_m": 1500.0,
    }
    buckets_seen = set()
    events = {}
    for scheduler in ("fod", "edf"):
        config = config_from_dict(dict(raw, scheduler=scheduler))
        result = run_simulation(config, seed=11, strict=True)
        m = result.metrics
        events[scheduler] = m.events
        assert m.events >= 10_000, (scheduler, m.events)
        assert m.generated == m.served + m.outages
        assert len(result.decisions) == m.generated
        for decision in result.decisions:
            if decision.chosen is None:
                continue
            match = [v for v in decision.candidates if v.server_id == decision.chosen]
            assert len(match) == 1
            assert match[0].free_channels > 0
            assert match[0].accepted is True
        b = m.breakdown
        for name in (
            "dropped_no_server",
            "rejected_at_admission",
            "evicted_on_reschedule",
            "missed_in_execution",
        ):
            if getattr(b, name) > 0:
                buckets_seen.add(name)
    assert len(buckets_seen) == 4, buckets_seen
    print(
        f"PASS criterion 11: strict runs of {events['fod']} and {events['edf']} "
        f"events, all four outage buckets exercised"
    )
