"""Enumeration streams and the combinators that rebuild them.

An enumeration is a total map from stages to codes: code ``0`` enumerates
nothing, code ``n + 1`` enumerates ``n``. Streams are pulled lazily, memoized,
and can be replayed from stage 0 by cloning.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, count, repeat
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from .errors import HorizonExhausted, PreconditionError, RateFlagError
from .foundation import FinSet

__all__ = [
    "EnumerationStream",
    "RateFunction",
    "enum_prefix",
    "without_repetitions",
    "is_r_good_at",
    "good_witnesses",
    "decidable_to_idgood",
    "good_upgrade",
    "union_with_decidable",
    "image_monotone",
    "companion_rate",
    "affine_embed",
    "interleave",
    "intersect",
    "intersection_gadget",
    "GadgetStreams",
]


class EnumerationStream:
    """A replayable, lazily evaluated enumeration.

    ``factory`` returns a fresh iterator of codes each time it is called; the
    stream memoizes what it has pulled. ``table`` is set for finitely
    supported streams (codes after the table are all 0) and ``generator``
    names a registry entry for infinite ones, which is what the ENUM v1
    serializer needs.
    """

    def __init__(
        self,
        factory: Callable[[], Iterator[int]],
        *,
        table: Sequence[int] | None = None,
        generator: tuple | None = None,
    ):
        self._factory = factory
        self._it: Iterator[int] | None = None
        self._cache: list[int] = []
        self.table = tuple(table) if table is not None else None
        self.generator = generator

    @classmethod
    def from_table(cls, codes: Iterable[int]) -> EnumerationStream:
        codes = tuple(map(int, codes))
        if codes and min(codes) < 0:
            raise ValueError("enumeration codes are natural numbers")
        return cls(lambda: chain(codes, repeat(0)), table=codes)

    @classmethod
    def from_function(cls, fn: Callable[[int], int], generator: tuple | None = None) -> EnumerationStream:
        return cls(lambda: (fn(k) for k in count()), generator=generator)

    @classmethod
    def zero(cls) -> EnumerationStream:
        return cls.from_table(())

    def clone(self) -> EnumerationStream:
        return EnumerationStream(self._factory, table=self.table, generator=self.generator)

    def _fill(self, k: int) -> None:
        if self._it is None:
            self._it = self._factory()
        cache, it = self._cache, self._it
        while len(cache) <= k:
            code = next(it)
            if code < 0:
                raise ValueError(f"negative code {code} at stage {len(cache)}")
            cache.append(code)

    def __getitem__(self, k):
        if isinstance(k, slice):
            if k.stop is None or k.stop < 0:
                raise ValueError("stream slices need an explicit non-negative stop")
            if k.stop:
                self._fill(k.stop - 1)
            return self._cache[k]
        if k < 0:
            raise IndexError("stages are natural numbers")
        if k >= len(self._cache):
            self._fill(k)
        return self._cache[k]

    def prefix(self, t: int) -> list[int]:
        """Codes of stages ``0 .. t-1``."""
        return self[:t]

    def __iter__(self) -> Iterator[int]:
        for k in count():
            yield self[k]

    @property
    def finite_support(self) -> bool:
        return self.table is not None

    def __repr__(self) -> str:
        if self.table is not None:
            return f"EnumerationStream(table={list(self.table)!r})"
        return f"EnumerationStream(pulled={self._cache[:8]!r}...)"


@dataclass(frozen=True)
class RateFunction:
    """A total function on the naturals with declared shape flags.

    ``monotone`` is one of ``"nondecreasing"``, ``"increasing"`` or ``"none"``.
    Flags are promises; :meth:`check` spot-checks them on a finite range.
    """

    fn: Callable[[int], int]
    monotone: str = "none"
    unbounded: bool = False
    name: str = ""

    def __call__(self, n: int) -> int:
        return self.fn(n)

    @classmethod
    def identity(cls) -> RateFunction:
        return cls(lambda n: n, "increasing", True, "id")

    @classmethod
    def linear(cls, a: int, b: int = 0) -> RateFunction:
        if a > 0:
            flag = "increasing"
        elif a == 0:
            flag = "nondecreasing"
        else:
            flag = "none"
        return cls(lambda n: a * n + b, flag, a > 0, f"{a}n+{b}")

    @classmethod
    def from_values(cls, values: Sequence[int], monotone: str = "none", unbounded: bool = False) -> RateFunction:
        values = tuple(values)

        def fn(n: int) -> int:
            if n >= len(values):
                raise HorizonExhausted(f"rate function tabulated only below {len(values)}")
            return values[n]

        return cls(fn, monotone, unbounded, "table")

    def check(self, upto: int, start: int = 0) -> None:
        """Raise :class:`RateFlagError` if the monotonicity flag fails on ``[start, upto]``."""
        if self.monotone == "none" or upto <= start:
            return
        prev = self.fn(start)
        for n in range(start + 1, upto + 1):
            cur = self.fn(n)
            if self.monotone == "increasing" and cur <= prev:
                raise RateFlagError(f"{self.name or 'rate'} not increasing at {n}: {prev} -> {cur}")
            if self.monotone == "nondecreasing" and cur < prev:
                raise RateFlagError(f"{self.name or 'rate'} decreases at {n}: {prev} -> {cur}")
            prev = cur


def enum_prefix(f: EnumerationStream, t: int) -> FinSet:
    """``Enum(f)[t]``: everything ``f`` enumerates at stages strictly below ``t``."""
    return FinSet(c - 1 for c in f[:t] if c)


def without_repetitions(f: EnumerationStream) -> EnumerationStream:
    """Keep only the first occurrence of every enumerated element."""

    def run() -> Iterator[int]:
        seen: set[int] = set()
        for k in count():
            c = f[k]
            if c and c - 1 not in seen:
                seen.add(c - 1)
                yield c
            else:
                yield 0

    table = None
    if f.table is not None:
        seen: set[int] = set()
        table = []
        for c in f.table:
            table.append(c if c and c - 1 not in seen else 0)
            if c:
                seen.add(c - 1)
    return EnumerationStream(run, table=table)


def is_r_good_at(f: EnumerationStream, r: Callable[[int], int], n: int, reference: FinSet | Iterable[int]) -> bool:
    """Whether ``{0..n-1} ∩ reference ⊆ Enum(f)[r(n)]``.

    ``reference`` stands in for the (unknowable) limit set; callers pass either
    ground truth or a horizon-stable prefix.
    """
    if n == 0:
        return True
    wanted = {x for x in reference if x < n}
    if not wanted:
        return True
    return wanted <= set(enum_prefix(f, r(n)))


def good_witnesses(f: EnumerationStream, r: Callable[[int], int], reference, upto: int) -> list[int]:
    """All ``n <= upto`` at which ``f`` is ``r``-good against ``reference``.

    Stages are replayed once, so this is linear in ``max r(n)``.
    """
    ref = sorted(set(reference))
    first_stage: dict[int, int] = {}
    bound = max((r(n) for n in range(upto + 1)), default=0)
    for k, c in enumerate(f[:bound]):
        if c and c - 1 not in first_stage:
            first_stage[c - 1] = k
    out = []
    # latest[n] = max first-enumeration stage over reference elements below n
    latest = -1
    missing = False
    j = 0
    for n in range(upto + 1):
        while j < len(ref) and ref[j] < n:
            x = ref[j]
            if x in first_stage:
                latest = max(latest, first_stage[x])
            else:
                missing = True
            j += 1
        if not missing and latest < r(n):
            out.append(n)
    return out


def decidable_to_idgood(chi: Callable[[int], bool]) -> EnumerationStream:
    """Enumerate ``n`` at stage ``n`` iff ``chi(n)``: an id-good enumeration without repetitions."""
    return EnumerationStream.from_function(lambda n: n + 1 if chi(n) else 0)


def good_upgrade(
    f: EnumerationStream,
    r: RateFunction,
    *,
    passthrough: bool = False,
    max_block: int = 10**6,
) -> EnumerationStream:
    """Turn an ``r``-good enumeration into an id-good one.

    Emits the blocks ``M_n = L_n \\ L_{n-1}`` with
    ``L_n = {0..n-1} ∩ Enum(f)[r(n)]`` one after another, each in increasing
    order. This assumes the enumerated set is infinite; for finite sets the
    caller selects ``passthrough`` and gets ``f`` back unchanged (whether a set
    is finite cannot be detected from the stream). ``max_block`` bounds the
    block search so a finite set in the wrong mode fails instead of hanging.
    """
    if passthrough:
        return f
    if r.monotone not in ("nondecreasing", "increasing") or not r.unbounded:
        raise RateFlagError("good_upgrade needs a nondecreasing, unbounded rate function")

    def run() -> Iterator[int]:
        enumerated: set[int] = set()
        emitted: set[int] = set()
        stage = 0
        prev_rate = r(0)
        n = 0
        idle = 0
        while True:
            n += 1
            rate = r(n)
            if rate < prev_rate:
                raise RateFlagError(f"rate function decreases at {n}: {prev_rate} -> {rate}")
            prev_rate = rate
            fresh = []
            while stage < rate:
                c = f[stage]
                stage += 1
                if c and c - 1 not in enumerated:
                    enumerated.add(c - 1)
                    fresh.append(c - 1)
            block = {x for x in fresh if x < n}
            if n - 1 in enumerated:
                block.add(n - 1)
            block -= emitted
            if not block:
                idle += 1
                if idle > max_block:
                    raise HorizonExhausted(
                        f"no new element for {max_block} blocks; finite set needs passthrough mode"
                    )
                continue
            idle = 0
            for x in sorted(block):
                emitted.add(x)
                yield x + 1

    return EnumerationStream(run)


def union_with_decidable(g: EnumerationStream, chi: Callable[[int], bool]) -> EnumerationStream:
    """``h(2n) = g(n)``, ``h(2n+1) = n+1`` if ``chi(n)`` else 0."""

    def run() -> Iterator[int]:
        for n in count():
            yield g[n]
            yield n + 1 if chi(n) else 0

    return EnumerationStream(run)


def image_monotone(g: EnumerationStream, f: RateFunction) -> EnumerationStream:
    """Enumerate the image of ``g``'s set under a nondecreasing ``f``."""
    checked = [-1]

    def apply(x: int) -> int:
        if x > checked[0]:
            f.check(x, start=max(0, checked[0]))
            checked[0] = x
        return f(x)

    def run() -> Iterator[int]:
        for n in count():
            c = g[n]
            yield apply(c - 1) + 1 if c else 0

    if f.monotone not in ("nondecreasing", "increasing"):
        raise RateFlagError("image_monotone needs a nondecreasing function")
    return EnumerationStream(run)


def companion_rate(f: RateFunction, search_limit: int = 10**7) -> RateFunction:
    """``r(n) = max{m : f(m) <= n}`` for a nondecreasing unbounded ``f``."""
    if not f.unbounded:
        raise RateFlagError("companion rate needs an unbounded function")

    def r(n: int) -> int:
        if f(0) > n:
            raise PreconditionError(f"no m with f(m) <= {n}")
        m = 0
        while f(m + 1) <= n:
            m += 1
            if m > search_limit:
                raise HorizonExhausted(f"f stays <= {n} past {search_limit}")
        return m

    return RateFunction(r, "nondecreasing", True, f"rate[{f.name}]")


def affine_embed(g: EnumerationStream, a: int, b: int) -> EnumerationStream:
    """Enumerate ``a·D + b`` where ``D`` is the set ``g`` enumerates."""
    if a < 1 or b < 0:
        raise PreconditionError("affine_embed needs a >= 1 and b >= 0")

    def code(c: int) -> int:
        return a * (c - 1) + b + 1 if c else 0

    def run() -> Iterator[int]:
        for k in count():
            yield code(g[k])

    table = [code(c) for c in g.table] if g.table is not None else None
    return EnumerationStream(run, table=table)


def interleave(fx: EnumerationStream, fy: EnumerationStream) -> EnumerationStream:
    """``f_Z(2m) = f_X(m)``, ``f_Z(2m+1) = f_Y(m)``."""

    def run() -> Iterator[int]:
        for m in count():
            yield fx[m]
            yield fy[m]

    table = None
    if fx.table is not None and fy.table is not None:
        n = max(len(fx.table), len(fy.table))
        table = [c for m in range(n) for c in (fx[m], fy[m])]
    return EnumerationStream(run, table=table)


def intersect(fa: EnumerationStream, fb: EnumerationStream) -> EnumerationStream:
    """Enumerate ``A ∩ B`` without repetitions.

    Stage ``2k`` reads ``fa(k)`` and stage ``2k+1`` reads ``fb(k)``; an element
    is emitted at the stage where it has first been seen on both sides.
    """

    def run() -> Iterator[int]:
        seen_a: set[int] = set()
        seen_b: set[int] = set()
        for k in count():
            for stream, mine, other in ((fa, seen_a, seen_b), (fb, seen_b, seen_a)):
                c = stream[k]
                if c and c - 1 not in mine:
                    mine.add(c - 1)
                    yield c if c - 1 in other else 0
                else:
                    yield 0

    return EnumerationStream(run)


class GadgetStreams(NamedTuple):
    a: EnumerationStream
    b: EnumerationStream
    recovered: EnumerationStream


def intersection_gadget(ga: EnumerationStream, gb: EnumerationStream) -> GadgetStreams:
    """Assemble ``A = 2·Ã ∪ odds`` and ``B = (2·B̃ + 1) ∪ evens`` and recover ``Ã ∪ B̃``.

    The recovered stream is the image of an enumeration of ``A ∩ B`` under
    ``n ↦ ⌊n/2⌋``; the inputs must enumerate disjoint sets.
    """
    a = union_with_decidable(affine_embed(ga, 2, 0), lambda n: n % 2 == 1)
    b = union_with_decidable(affine_embed(gb, 2, 1), lambda n: n % 2 == 0)
    halve = RateFunction(lambda n: n // 2, "nondecreasing", True, "half")
    recovered = image_monotone(intersect(a, b), halve)
    return GadgetStreams(a, b, recovered)
