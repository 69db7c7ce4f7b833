"""Shared fixtures and instance generators.

The generators here use plain random.Random, independent of the package's
own substream derivation, so cross-checks never share randomness with the
code under test.
"""

import random

import pytest

from edgesched.model import Task

# Worked example used throughout the suite: five tasks on one server at
# 1 Gcycle/s. Megacycle works and millisecond deadlines keep numbers tiny.
GOLDEN = [
    (1, 4e6, 0.008),
    (2, 5e6, 0.006),
    (3, 2e6, 0.011),
    (4, 1e6, 0.006),
    (5, 2e6, 0.004),
]

GOLDEN_CAPACITY = 1e9


def make_task(seq, cycles, deadline, *, user=0, arrival=0.0, bits=0.0):
    return Task(
        id=(user, seq),
        arrival_time=arrival,
        cpu_cycles=float(cycles),
        deadline=float(deadline),
        data_size=float(bits),
        origin_user=user,
    )


@pytest.fixture(autouse=True)
def _isolate_seed_env(monkeypatch):
    # A seed exported in the developer's shell must not leak into runs
    # that rely on config-file seeds.
    monkeypatch.delenv("EDGESCHED_SEED", raising=False)


@pytest.fixture
def golden_tasks():
    return [make_task(seq, cycles, deadline) for seq, cycles, deadline in GOLDEN]


def grid_instance(seed, n, *, work_hi=9, deadline_hi=None):
    """Integer works and deadlines, meant for capacity 1.0: every prefix
    sum is exact in floating point, and the small ranges force duplicate
    works and deadlines."""
    rng = random.Random(seed)
    hi = deadline_hi if deadline_hi is not None else max(3 * n, 4)
    return [
        make_task(i, rng.randint(1, work_hi), rng.randint(1, hi))
        for i in range(1, n + 1)
    ]


def smooth_instance(seed, n, *, mean_work=1.0, slack=0.35):
    """Continuous works and deadlines at capacity 1.0, contended enough
    that both acceptance and rejection are common."""
    rng = random.Random(seed)
    tasks = []
    for i in range(1, n + 1):
        work = rng.expovariate(1.0 / mean_work)
        deadline = rng.uniform(0.25, max(slack * n, 1.0))
        tasks.append(make_task(i, work, deadline))
    return tasks


def spearman(xs, ys):
    """Rank correlation with average ranks on ties."""

    def rank(values):
        order = sorted(range(len(values)), key=lambda i: values[i])
        ranks = [0.0] * len(values)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
                j += 1
            shared = (i + j) / 2 + 1
            for k in range(i, j + 1):
                ranks[order[k]] = shared
            i = j + 1
        return ranks

    rx, ry = rank(xs), rank(ys)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = (sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry)) ** 0.5
    return num / den if den else 0.0
