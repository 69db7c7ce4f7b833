import math
import random

from edgesched.slack_tree import INF, MinSlackTree, WorkFenwick


class BruteSlack:
    """Flat-array mirror of the tree semantics."""

    def __init__(self, n):
        self.values = [INF] * n

    def assign(self, index, value):
        self.values[index] = value

    def add_range(self, left, right, delta):
        # INF + finite delta stays INF, matching the tree's empty slots
        for i in range(left, right + 1):
            self.values[i] += delta

    def suffix_min(self, left):
        tail = self.values[left:]
        return min(tail) if tail else INF


def run_mirror(seed, size, steps, *, integer):
    rng = random.Random(seed)
    tree = MinSlackTree(size)
    brute = BruteSlack(size)
    for _ in range(steps):
        op = rng.random()
        if op < 0.45:
            i = rng.randrange(size)
            value = float(rng.randint(-50, 50)) if integer else rng.uniform(-50.0, 50.0)
            tree.assign(i, value)
            brute.assign(i, value)
        elif op < 0.55:
            i = rng.randrange(size)
            tree.assign(i, INF)
            brute.assign(i, INF)
        else:
            left = rng.randrange(size)
            right = rng.randrange(left, size)
            delta = float(rng.randint(-5, 5)) if integer else rng.uniform(-5.0, 5.0)
            tree.add_range(left, right, delta)
            brute.add_range(left, right, delta)
        for left in range(size):
            got = tree.suffix_min(left)
            want = brute.suffix_min(left)
            if integer:
                assert got == want, (left, got, want)
            elif math.isinf(want):
                assert math.isinf(got)
            else:
                assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)


class TestMinSlackTree:
    def test_integer_ops_match_brute_force_exactly(self):
        for seed, size in [(1, 1), (2, 2), (3, 3), (4, 7), (5, 16), (6, 33)]:
            run_mirror(seed, size, 120, integer=True)

    def test_float_ops_match_brute_force(self):
        for seed, size in [(11, 5), (12, 13), (13, 32)]:
            run_mirror(seed, size, 120, integer=False)

    def test_assign_ignores_pending_range_adds(self):
        # a pending lazy delta must not leak into a later point assignment
        tree = MinSlackTree(4)
        tree.add_range(0, 3, -5.0)
        tree.assign(1, 10.0)
        assert tree.suffix_min(1) == 10.0
        assert tree.suffix_min(2) == INF

    def test_empty_slots_are_infinite(self):
        tree = MinSlackTree(6)
        assert tree.suffix_min(0) == INF
        tree.add_range(0, 5, -3.0)
        assert tree.suffix_min(0) == INF

    def test_reverted_insertion_round_trips(self):
        # mirror of the scheduler's reject path: assign, shift, undo both
        tree = MinSlackTree(5)
        tree.assign(0, 4.0)
        tree.assign(3, 1.0)
        tree.assign(2, 2.0)
        tree.add_range(3, 4, -2.0)
        assert tree.suffix_min(0) == -1.0
        tree.assign(2, INF)
        tree.add_range(3, 4, 2.0)
        assert tree.suffix_min(0) == 1.0
        assert tree.suffix_min(1) == 1.0

    def test_single_slot(self):
        tree = MinSlackTree(1)
        tree.assign(0, -2.5)
        assert tree.suffix_min(0) == -2.5


class TestWorkFenwick:
    def test_prefix_before_start_is_zero(self):
        assert WorkFenwick(4).prefix(-1) == 0.0

    def test_matches_running_sums(self):
        rng = random.Random(99)
        n = 24
        fen = WorkFenwick(n)
        flat = [0.0] * n
        for _ in range(200):
            i = rng.randrange(n)
            delta = float(rng.randint(1, 9))
            fen.add(i, delta)
            flat[i] += delta
            for k in range(n):
                assert fen.prefix(k) == sum(flat[: k + 1])

    def test_float_accumulation(self):
        fen = WorkFenwick(3)
        fen.add(0, 0.1)
        fen.add(1, 0.2)
        fen.add(2, 0.4)
        assert math.isclose(fen.prefix(2), 0.7, rel_tol=1e-12)
