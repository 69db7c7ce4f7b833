"""Index trees backing the linearithmic scheduler variant.

``MinSlackTree`` keeps one leaf per deadline slot holding that slot's slack
(deadline minus cumulative work); empty slots hold +inf so they never win a
minimum query. Range adds are lazy, so shifting every slack in a suffix
costs O(log n).
"""

from __future__ import annotations

INF = float("inf")


class MinSlackTree:
    def __init__(self, size: int):
        self._n = max(1, size)
        self._min = [INF] * (4 * self._n)
        self._add = [0.0] * (4 * self._n)

    def _push(self, node: int) -> None:
        pending = self._add[node]
        if pending:
            for child in (2 * node, 2 * node + 1):
                self._min[child] += pending
                self._add[child] += pending
            self._add[node] = 0.0

    def assign(self, index: int, value: float) -> None:
        """Overwrite one slot, honoring adds pending above it."""
        self._assign(1, 0, self._n - 1, index, value)

    def _assign(self, node: int, lo: int, hi: int, index: int, value: float) -> None:
        if lo == hi:
            self._min[node] = value
            self._add[node] = 0.0
            return
        self._push(node)
        mid = (lo + hi) // 2
        if index <= mid:
            self._assign(2 * node, lo, mid, index, value)
        else:
            self._assign(2 * node + 1, mid + 1, hi, index, value)
        self._min[node] = min(self._min[2 * node], self._min[2 * node + 1])

    def add_range(self, left: int, right: int, delta: float) -> None:
        """Add ``delta`` to every slot in [left, right] (inclusive)."""
        if left > right:
            return
        self._add_range(1, 0, self._n - 1, left, right, delta)

    def _add_range(self, node: int, lo: int, hi: int, left: int, right: int, delta: float) -> None:
        if right < lo or hi < left:
            return
        if left <= lo and hi <= right:
            self._min[node] += delta
            self._add[node] += delta
            return
        self._push(node)
        mid = (lo + hi) // 2
        self._add_range(2 * node, lo, mid, left, right, delta)
        self._add_range(2 * node + 1, mid + 1, hi, left, right, delta)
        self._min[node] = min(self._min[2 * node], self._min[2 * node + 1])

    def suffix_min(self, left: int) -> float:
        """Minimum slack over [left, n-1]."""
        return self._query(1, 0, self._n - 1, left, self._n - 1)

    def _query(self, node: int, lo: int, hi: int, left: int, right: int) -> float:
        if right < lo or hi < left:
            return INF
        if left <= lo and hi <= right:
            return self._min[node]
        self._push(node)
        mid = (lo + hi) // 2
        return min(
            self._query(2 * node, lo, mid, left, right),
            self._query(2 * node + 1, mid + 1, hi, left, right),
        )


class WorkFenwick:
    """Prefix sums of per-slot work under point updates."""

    def __init__(self, size: int):
        self._n = size
        self._tree = [0.0] * (size + 1)

    def add(self, index: int, delta: float) -> None:
        i = index + 1
        while i <= self._n:
            self._tree[i] += delta
            i += i & -i

    def prefix(self, index: int) -> float:
        """Sum of slots [0, index]; index -1 gives 0."""
        total = 0.0
        i = index + 1
        while i > 0:
            total += self._tree[i]
            i -= i & -i
        return total
