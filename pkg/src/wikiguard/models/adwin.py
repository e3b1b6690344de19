"""Adaptive windowing (ADWIN) change detector.

Keeps an exponential histogram of the recent value stream and drops the
oldest buckets whenever two adjacent sub-windows have means that differ
by more than the deviation bound. Fully deterministic.
"""

from __future__ import annotations

import math


class _Bucket:
    __slots__ = ("size", "total", "m2")

    def __init__(self, size: float, total: float, m2: float):
        self.size = size
        self.total = total
        self.m2 = m2


def _merge(a: _Bucket, b: _Bucket) -> _Bucket:
    size = a.size + b.size
    delta = b.total / b.size - a.total / a.size
    m2 = a.m2 + b.m2 + delta * delta * a.size * b.size / size
    return _Bucket(size, a.total + b.total, m2)


class Adwin:
    """Windowed mean with statistically justified shrinking.

    ``update`` returns True when the window was cut, i.e. the mean of the
    monitored signal changed. ``estimation`` is the mean over the kept
    window.
    """

    def __init__(
        self,
        delta: float = 0.002,
        clock: int = 32,
        max_buckets: int = 5,
        min_window: int = 5,
    ):
        self.delta = delta
        self.clock = clock
        self.max_buckets = max_buckets
        self.min_window = min_window
        # rows[i] holds buckets of 2**i elements, index 0 = newest
        self.rows: list[list[_Bucket]] = [[]]
        self.width = 0.0
        self.total = 0.0
        self._ticks = 0

    @property
    def estimation(self) -> float:
        return self.total / self.width if self.width else 0.0

    @property
    def n(self) -> int:
        return int(self.width)

    def _window_variance(self) -> float:
        if self.width < 2:
            return 0.0
        merged = None
        for row in self.rows:
            for bucket in row:
                merged = bucket if merged is None else _merge(merged, bucket)
        return merged.m2 / merged.size

    def _insert(self, value: float) -> None:
        self.rows[0].insert(0, _Bucket(1.0, value, 0.0))
        self.width += 1.0
        self.total += value
        level = 0
        while len(self.rows[level]) > self.max_buckets:
            if level + 1 == len(self.rows):
                self.rows.append([])
            oldest = self.rows[level].pop()
            older = self.rows[level].pop()
            # pop() order: `oldest` is the tail, `older` the one before it
            self.rows[level + 1].insert(0, _merge(older, oldest))
            level += 1

    def _drop_oldest_bucket(self) -> None:
        for level in range(len(self.rows) - 1, -1, -1):
            if self.rows[level]:
                bucket = self.rows[level].pop()
                self.width -= bucket.size
                self.total -= bucket.total
                return

    def _cut_found(self) -> bool:
        if self.width < 2 * self.min_window:
            return False
        variance = self._window_variance()
        dd = math.log(2.0 * math.log(max(self.width, math.e)) / self.delta)
        buckets = [b for row in reversed(self.rows) for b in reversed(row)]
        n0 = 0.0
        sum0 = 0.0
        for bucket in buckets[:-1]:
            n0 += bucket.size
            sum0 += bucket.total
            n1 = self.width - n0
            if n0 < self.min_window or n1 < self.min_window:
                continue
            mean_gap = abs(sum0 / n0 - (self.total - sum0) / n1)
            m = 1.0 / (n0 - self.min_window + 1.0) + 1.0 / (n1 - self.min_window + 1.0)
            epsilon = math.sqrt(2.0 * m * variance * dd) + 2.0 / 3.0 * m * dd
            if mean_gap > epsilon:
                return True
        return False

    def update(self, value: float) -> bool:
        self._insert(value)
        self._ticks += 1
        if self._ticks % self.clock != 0:
            return False
        changed = False
        while self._cut_found():
            self._drop_oldest_bucket()
            changed = True
        return changed
