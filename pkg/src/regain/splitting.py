"""Splitting one stream of codes into two, with infinitely many catch-up stages on each side.

The engine keeps a stage table ``s_i[t]`` (initially ``s_i[0] = i``). At a
stage with code ``n + 1`` it finds ``k = min{j : s_j[t] > n}``, routes the
code to ``h`` when ``k`` is even and to ``g`` when ``k`` is odd, and then adds
``t + 1`` to every row above ``k``. Every code goes to exactly one side, and
each stabilized row ``i`` with limit ``S_i`` certifies that one side has
nothing small left to emit after stage ``S_i``.

The set-level (:func:`split_ce_set`) and real-level (:func:`split_regular`)
entry points only adapt framing around :func:`split_stream`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Union

from .approximations import ApproxSeq
from .enumerations import EnumerationStream, without_repetitions
from .errors import InvariantViolation, PreconditionError
from .foundation import Dyadic
from .stagetable import StageTable

__all__ = [
    "DeltaName",
    "SplitResult",
    "split_stream",
    "split_ce_set",
    "split_regular",
    "deltaname_partial_sums",
    "partial_sum_numerators",
    "conservation_failures",
    "catchup_failures",
    "catchup_stages",
    "check_split",
    "regular_split_failures",
]


def _codes(f: EnumerationStream | Iterable[int], horizon: int) -> list[int]:
    """The first ``horizon`` codes, without pulling zeros past a finite table."""
    if isinstance(f, EnumerationStream):
        if f.table is not None:
            return list(f.table[:horizon])
        return f[:horizon]
    codes = list(f)[:horizon]
    return codes


@dataclass
class DeltaName:
    """Codes whose summands ``2**-code`` (code 0: summand 0) sum to a real.

    With ``multiplicity_bound = n`` no positive code may occur more than ``n``
    times; :meth:`codes` checks this as the codes are read.
    """

    stream: EnumerationStream
    multiplicity_bound: int | None = None

    @classmethod
    def from_codes(cls, codes: Iterable[int], multiplicity_bound: int | None = None) -> DeltaName:
        return cls(EnumerationStream.from_table(codes), multiplicity_bound)

    def codes(self, horizon: int) -> list[int]:
        codes = _codes(self.stream, horizon)
        if self.multiplicity_bound is not None:
            seen: Counter[int] = Counter()
            for t, c in enumerate(codes):
                if c:
                    seen[c] += 1
                    if seen[c] > self.multiplicity_bound:
                        raise PreconditionError(
                            f"code {c} occurs {seen[c]} times by stage {t}, "
                            f"above the bound {self.multiplicity_bound}"
                        )
        return codes


@dataclass(frozen=True)
class SplitResult:
    g: Union[EnumerationStream, DeltaName]
    h: Union[EnumerationStream, DeltaName]
    table: StageTable
    horizon: int

    def g_codes(self) -> list[int]:
        return _side_codes(self.g, self.horizon)

    def h_codes(self) -> list[int]:
        return _side_codes(self.h, self.horizon)


def _side_codes(side, horizon: int) -> list[int]:
    stream = side.stream if isinstance(side, DeltaName) else side
    codes = list(stream.table[:horizon]) if stream.table is not None else stream[:horizon]
    return codes + [0] * (horizon - len(codes))


def _split_codes(codes: list[int], horizon: int) -> tuple[list[int], list[int], StageTable]:
    table = StageTable()
    g = [0] * horizon
    h = [0] * horizon
    for t, c in enumerate(codes):
        if not c:
            continue
        k = table.first_row_above(c - 1)
        if k % 2 == 0:
            h[t] = c
        else:
            g[t] = c
        table.apply(t, k, t + 1)
    table.advance(horizon)
    return g, h, table


def split_stream(f: EnumerationStream | Iterable[int], horizon: int) -> SplitResult:
    """Split the first ``horizon`` stages of ``f`` into ``g`` and ``h``."""
    g, h, table = _split_codes(_codes(f, horizon), horizon)
    return SplitResult(EnumerationStream.from_table(g), EnumerationStream.from_table(h), table, horizon)


def split_ce_set(fC: EnumerationStream, horizon: int) -> SplitResult:
    """Enumerations without repetitions of a disjoint pair ``A ⊎ B = C``."""
    return split_stream(without_repetitions(fC), horizon)


def split_regular(d: DeltaName, horizon: int) -> tuple[DeltaName, DeltaName, StageTable]:
    """Split a (bounded-multiplicity) name into two names with the same bound."""
    g, h, table = _split_codes(d.codes(horizon), horizon)
    return (
        DeltaName.from_codes(g, d.multiplicity_bound),
        DeltaName.from_codes(h, d.multiplicity_bound),
        table,
    )


def deltaname_partial_sums(d: DeltaName) -> ApproxSeq:
    """``A_t = Σ_{k<t} 2**-d(k)`` as an exact nondecreasing sequence."""

    def run():
        total = Dyadic(0)
        stage = 0
        while True:
            yield total
            c = d.stream[stage]
            if c:
                total = total + Dyadic.pow2(-c)
            stage += 1

    return ApproxSeq(run, "nondecreasing")


def partial_sum_numerators(codes: Iterable[int], exponent: int) -> list[int]:
    """``[A_0, ..., A_T]`` scaled by ``2**exponent`` (exact integers).

    A faster equivalent of :func:`deltaname_partial_sums` for long finite
    prefixes; ``exponent`` must be at least the largest code.
    """
    codes = list(codes)
    if codes and max(codes) > exponent:
        raise ValueError("exponent below the largest code")
    return list(accumulate((1 << (exponent - c) if c else 0 for c in codes), initial=0))


def conservation_failures(f_codes: list[int], g_codes: list[int], h_codes: list[int]) -> list[int]:
    """Values ``n`` where ``|g^-1{n+1}| + |h^-1{n+1}| != |f^-1{n+1}|``."""
    fc = Counter(c for c in f_codes if c)
    gh = Counter(c for c in g_codes if c) + Counter(c for c in h_codes if c)
    return sorted(c - 1 for c in fc.keys() | gh.keys() if fc[c] != gh[c])


def catchup_stages(result: SplitResult, guard: int = 2) -> tuple[dict[int, int], dict[int, int]]:
    """Certified row limits, split into even rows (``g`` side) and odd rows (``h`` side)."""
    rows = result.table.stabilized_rows(result.horizon, guard)
    return (
        {i: s for i, s in rows.items() if i % 2 == 0},
        {i: s for i, s in rows.items() if i % 2 == 1},
    )


def catchup_failures(result: SplitResult, guard: int = 2) -> list[tuple[int, int, int]]:
    """Certified rows whose catch-up inclusion fails, as ``(row, S_i, offending stage)``.

    Even rows require ``g^-1{1..S_i} ⊆ {0..S_i-1}``; odd rows the same for ``h``.
    """
    even, odd = catchup_stages(result, guard)
    bad = []
    for rows, codes in ((even, result.g_codes()), (odd, result.h_codes())):
        # smallest[t] = (least positive code at a stage >= t, that stage)
        smallest: list[tuple[int, int]] = [(0, 0)] * (len(codes) + 1)
        best = (float("inf"), -1)
        for t in range(len(codes) - 1, -1, -1):
            if codes[t] and codes[t] <= best[0]:
                best = (codes[t], t)
            smallest[t] = best
        smallest[len(codes)] = (float("inf"), -1)
        for i, s in rows.items():
            c, t = smallest[min(s, len(codes))]
            if c <= s:
                bad.append((i, s, t))
    return sorted(bad)


def check_split(result: SplitResult, f_codes: list[int]) -> None:
    """Raise :class:`InvariantViolation` unless conservation and catch-up both hold."""
    lost = conservation_failures(f_codes, result.g_codes(), result.h_codes())
    if lost:
        raise InvariantViolation("conservation", f"values {lost[:5]} not conserved")
    late = catchup_failures(result)
    if late:
        i, s, t = late[0]
        raise InvariantViolation("catch-up", f"row {i} (S={s}) violated at stage {t}")


def regular_split_failures(
    d_codes: list[int],
    g_codes: list[int],
    h_codes: list[int],
    table: StageTable,
    bound: int,
    guard: int = 2,
) -> list[tuple[str, str]]:
    """Exact partial-sum additivity at every stage, and the ``bound·2^-t*`` tail bound at certified rows.

    All sums are compared as integers scaled by ``2**E`` for the largest code ``E``.
    """
    failures: list[tuple[str, str]] = []
    horizon = table.horizon
    E = max(max(d_codes, default=0), 1)
    A_d = partial_sum_numerators(d_codes[:horizon], E)
    A_g = partial_sum_numerators(g_codes[:horizon], E)
    A_h = partial_sum_numerators(h_codes[:horizon], E)
    for t, (x, y, z) in enumerate(zip(A_g, A_h, A_d)):
        if x + y != z:
            failures.append(("partial-sum additivity", f"A_{t}(g) + A_{t}(h) != A_{t}(d)"))
            break
    for i, s in sorted(table.stabilized_rows(horizon, guard).items()):
        A = A_g if i % 2 == 0 else A_h
        if s > horizon:
            continue
        # (A_H - A_s) / 2^E <= bound * 2^-s
        if (A[-1] - A[s]) << s > bound << E:
            side = "g" if i % 2 == 0 else "h"
            failures.append(("tail bound", f"row {i}: {side} gains more than {bound}*2^-{s} after stage {s}"))
    return failures
