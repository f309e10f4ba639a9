"""Doubly indexed stage tables ``s_i[t]`` with suffix-jump updates.

Both the degree-preserving build and the splitting engine start from
``s_i[0] = i`` and, at some stages ``t``, add a jump ``delta`` to every row
``i > k``. The table therefore only stores the event log ``(t, k, delta)``;
current values come from a Fenwick tree over ``k`` and historical values from
replaying the log.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator

from .errors import InvariantViolation

__all__ = ["StageTable", "DenseStageTable", "Event"]


@dataclass(frozen=True)
class Event:
    stage: int
    k: int
    delta: int


class _Fenwick:
    """Prefix sums over a growable array of (big) integers."""

    def __init__(self, size: int = 16):
        self.size = size
        self.tree = [0] * (size + 1)
        self.raw = [0] * size

    def _grow(self, need: int) -> None:
        size = self.size
        while size < need:
            size *= 2
        if size == self.size:
            return
        raw = self.raw + [0] * (size - self.size)
        self.size, self.raw = size, raw
        tree = [0] * (size + 1)
        for i, v in enumerate(raw, start=1):
            tree[i] += v
            j = i + (i & -i)
            if j <= size:
                tree[j] += tree[i]
        self.tree = tree

    def add(self, pos: int, value: int) -> None:
        if pos >= self.size:
            self._grow(pos + 1)
        self.raw[pos] += value
        i = pos + 1
        tree, size = self.tree, self.size
        while i <= size:
            tree[i] += value
            i += i & -i

    def prefix(self, n: int) -> int:
        """Sum of positions ``0 .. n-1``."""
        n = min(n, self.size)
        total = 0
        tree = self.tree
        while n > 0:
            total += tree[n]
            n -= n & -n
        return total


class StageTable:
    """Sparse stage table: ``s_i[t] = i + Σ{delta : (t', k, delta) logged, t' < t, k < i}``.

    Columns are increasing in ``i`` and rows nondecreasing in ``t`` as long as
    every jump is positive, which :meth:`apply` enforces.
    """

    def __init__(self) -> None:
        self.events: list[Event] = []
        self.horizon = 0
        self._fen = _Fenwick()
        # last stage at which some row > k changed, as a running prefix-max
        self._last_by_k: dict[int, int] = {}

    def apply(self, stage: int, k: int, delta: int) -> None:
        """Log ``s_i[stage+1] = s_i[stage] + delta`` for every ``i > k``."""
        if delta <= 0:
            raise InvariantViolation("rows nondecreasing", f"non-positive jump {delta} at stage {stage}")
        if self.events and stage < self.events[-1].stage:
            raise ValueError("events must be logged in stage order")
        self.events.append(Event(stage, k, delta))
        self._fen.add(k, delta)
        self._last_by_k[k] = stage
        self.horizon = max(self.horizon, stage + 1)

    def advance(self, horizon: int) -> None:
        """Record that stages below ``horizon`` have run (possibly without events)."""
        self.horizon = max(self.horizon, horizon)

    def current(self, i: int) -> int:
        """``s_i[horizon]``."""
        return i + self._fen.prefix(i)

    def first_row_above(self, n: int) -> int:
        """Least ``j`` with ``s_j[horizon] > n`` (it is at most ``n + 1``)."""
        lo, hi = 0, n + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.current(mid) > n:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def last_change(self, i: int) -> int:
        """Last stage ``t`` with ``s_i[t+1] != s_i[t]``, or ``-1``."""
        return max((t for k, t in self._last_by_k.items() if k < i), default=-1)

    def value(self, i: int, t: int) -> int:
        """Historical value ``s_i[t]``."""
        return i + sum(e.delta for e in self.events if e.stage < t and e.k < i)

    def row_history(self, i: int) -> list[tuple[int, int]]:
        """``[(t, s_i[t])]`` at ``t = 0`` and after each change of row ``i``."""
        out = [(0, i)]
        v = i
        for e in self.events:
            if e.k < i:
                v += e.delta
                out.append((e.stage + 1, v))
        return out

    def value_from_history(self, history: list[tuple[int, int]], t: int) -> int:
        stages = [s for s, _ in history]
        return history[bisect_right(stages, t) - 1][1]

    def stabilized(self, i: int, horizon: int | None = None, guard: int = 2) -> int | None:
        """Certified limit ``S_i`` or ``None``.

        A row counts as stabilized at horizon ``H`` when its value ``S`` at
        ``H`` has not changed on ``[S, H]`` and ``guard * S <= H``.
        """
        horizon = self.horizon if horizon is None else horizon
        if horizon < self.horizon:
            history = self.row_history(i)
            s = self.value_from_history(history, horizon)
            last = max((t - 1 for t, _ in history[1:] if t <= horizon), default=-1)
        else:
            s = self.current(i)
            last = self.last_change(i)
        if last >= s or guard * s > horizon:
            return None
        return s

    def stabilized_rows(self, horizon: int | None = None, guard: int = 2) -> dict[int, int]:
        """All certified rows; values increase in ``i`` so the scan stops once ``guard * s_i > H``."""
        horizon = self.horizon if horizon is None else horizon
        if horizon < self.horizon:
            out: dict[int, int] = {}
            i = 0
            while guard * self.value(i, horizon) <= horizon:
                s = self.stabilized(i, horizon, guard)
                if s is not None:
                    out[i] = s
                i += 1
            return out
        out = {}
        keys = sorted(self._last_by_k)
        j = 0
        last = -1
        i = 0
        while True:
            while j < len(keys) and keys[j] < i:
                last = max(last, self._last_by_k[keys[j]])
                j += 1
            s = self.current(i)
            if guard * s > horizon:
                return out
            if last < s:
                out[i] = s
            i += 1

    def rows_touched(self) -> int:
        """One past the largest ``k`` in the log (rows beyond share one jump history)."""
        return max(self._last_by_k, default=-1) + 1

    def dense(self, rows: int, horizon: int | None = None) -> DenseStageTable:
        """Materialize ``s_i[t]`` for ``i < rows`` and ``t <= horizon``."""
        horizon = self.horizon if horizon is None else horizon
        table = DenseStageTable(rows)
        events = iter(self.events)
        pending = next(events, None)
        for t in range(horizon):
            while pending is not None and pending.stage == t:
                table.jump(pending.k, pending.delta)
                pending = next(events, None)
            table.close_stage()
        return table

    def to_lines(self) -> Iterator[str]:
        for e in self.events:
            yield f"{e.stage} {e.k} {e.delta}"


class DenseStageTable:
    """Straight materialization used to cross-check :class:`StageTable`.

    ``columns[t][i] == s_i[t]``.
    """

    def __init__(self, rows: int):
        self.rows = rows
        self.columns: list[list[int]] = [list(range(rows))]
        self._next = list(range(rows))

    def jump(self, k: int, delta: int) -> None:
        for i in range(k + 1, self.rows):
            self._next[i] += delta

    def close_stage(self) -> None:
        self.columns.append(list(self._next))

    def check_claims(self) -> None:
        """Columns increasing, rows nondecreasing (direct scans)."""
        for t, col in enumerate(self.columns):
            for i in range(1, len(col)):
                if col[i] <= col[i - 1]:
                    raise InvariantViolation("columns increasing", f"s_{i}[{t}] <= s_{i - 1}[{t}]")
        for t in range(1, len(self.columns)):
            prev, col = self.columns[t - 1], self.columns[t]
            for i in range(len(col)):
                if col[i] < prev[i]:
                    raise InvariantViolation("rows nondecreasing", f"s_{i}[{t}] < s_{i}[{t - 1}]")
