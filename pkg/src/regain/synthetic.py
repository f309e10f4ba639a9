"""Seeded generators for synthetic inputs, plus the registry behind ``ENUM v1 inf`` files.

Every generator takes an explicit ``random.Random`` (or a seed) so runs are
reproducible; nothing here reads global random state.
"""

from __future__ import annotations

import random
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Iterator

from .approximations import ApproxSeq
from .enumerations import EnumerationStream
from .errors import FormatError
from .foundation import Dyadic, FinSet
from .splitting import DeltaName

__all__ = [
    "GENERATORS",
    "generator_stream",
    "random_finite_stream",
    "random_delta_name",
    "RegainingSource",
    "regaining_source",
    "RGoodSource",
    "r_good_source",
    "shuffled_injective",
    "random_dyadic",
]


def random_finite_stream(rng: random.Random, max_value: int = 64, min_len: int = 20, max_len: int = 300, zero_rate: float = 0.3) -> list[int]:
    """A finite code table: values ``<= max_value`` (codes up to ``max_value + 1``) with zeros mixed in."""
    length = rng.randint(min_len, max_len)
    return [0 if rng.random() < zero_rate else rng.randint(1, max_value + 1) for _ in range(length)]


def random_delta_name(rng: random.Random, bound: int, distinct: int | None = None, max_code: int = 400) -> DeltaName:
    """A finite name in which every code occurs between 1 and ``bound`` times, interleaved with zeros."""
    distinct = distinct or rng.randint(40, 160)
    codes = rng.sample(range(1, max_code + 1), distinct)
    body = [c for c in codes for _ in range(rng.randint(1, bound))]
    rng.shuffle(body)
    out: list[int] = []
    for c in body:
        out.extend([0] * rng.randint(0, 3))
        out.append(c)
    return DeltaName.from_codes(out, bound)


@dataclass(frozen=True)
class RegainingSource:
    """``b_n = limit - delta_n`` with ``delta`` dropping below ``2**-n`` exactly at ``witness_points``."""

    seq: ApproxSeq
    limit: Dyadic
    witness_points: tuple[int, ...]
    deficit: Callable[[int], Dyadic]


def regaining_source(rng: random.Random, horizon: int, limit: Dyadic | None = None, gaps: tuple[int, int] = (3, 12)) -> RegainingSource:
    """Nondecreasing dyadic sequence with a known dyadic limit and known witnesses.

    Between consecutive witness points ``w' < w`` the deficit is
    ``2**-(w'+1)``; at ``w`` it drops to ``2**-(w+1)``. Witness points are
    generated well past ``horizon`` so every index up to it is covered.
    """
    if limit is None:
        limit = Dyadic(rng.randrange(1, 1 << 20) * 2 + 1, 21)  # odd numerator: a genuine 21-bit dyadic
    points = [rng.randint(*gaps)]
    while points[-1] < 4 * horizon + 64:
        points.append(points[-1] + rng.randint(*gaps))

    def deficit(n: int) -> Dyadic:
        j = bisect_left(points, n)
        if j == len(points):
            raise ValueError(f"index {n} beyond the generated witness points")
        if points[j] == n:
            return Dyadic.pow2(-(n + 1))
        prev = points[j - 1] if j else -1
        return Dyadic.pow2(-(prev + 1))

    seq = ApproxSeq.from_function(lambda n: limit - deficit(n))
    return RegainingSource(seq, limit, tuple(points), deficit)


@dataclass(frozen=True)
class RGoodSource:
    """An enumeration that is good for ``r(n) = 2n`` at the catch-up points, with its full set."""

    stream: EnumerationStream
    members: FinSet
    catchup_points: tuple[int, ...]


def r_good_source(rng: random.Random, upto: int, density: float = 0.5, defer: float = 0.1, repeat: float = 0.05) -> RGoodSource:
    """Blocks ``A ∩ [c_{j-1}, c_j)`` are enumerated within stages ``[2c_{j-1}, 2c_j)``.

    An element is deferred to the next window with probability ``defer`` and
    an earlier element is re-enumerated with probability ``repeat``. Blocks
    continue forever (lazily); ``members`` is the part of ``A`` below ``upto``.
    """
    seed = rng.getrandbits(64)

    def blocks() -> Iterator[tuple[int, int, list[int]]]:
        local = random.Random(seed)
        lo = 0
        while True:
            hi = lo + local.randint(3, 12)
            yield lo, hi, [x for x in range(lo, hi) if local.random() < density]
            lo = hi

    def run() -> Iterator[int]:
        local = random.Random(seed ^ 0x5EED)
        carried: list[int] = []
        emitted: list[int] = []
        for lo, hi, block in blocks():
            window = 2 * (hi - lo)
            now = list(carried)
            carried = []
            for x in block:
                (carried if local.random() < defer else now).append(x)
            if emitted and local.random() < repeat:
                now.append(local.choice(emitted))
            now = now[:window]
            slots = sorted(local.sample(range(window), len(now)))
            local.shuffle(now)
            placed = dict(zip(slots, now))
            for s in range(window):
                x = placed.get(s)
                if x is None:
                    yield 0
                else:
                    emitted.append(x)
                    yield x + 1

    members = []
    points = []
    for lo, hi, block in blocks():
        if lo > upto:
            break
        members.extend(block)
        points.append(hi)
    return RGoodSource(EnumerationStream(run), FinSet(x for x in members if x < upto), tuple(points))


def shuffled_injective(seed: int, density: float = 0.5, window: int = 8) -> EnumerationStream:
    """Injective, never-empty enumeration of a random set: consecutive windows of elements, each shuffled."""

    def run() -> Iterator[int]:
        rng = random.Random(seed)
        x = 0
        while True:
            block = []
            while len(block) < window:
                if rng.random() < density:
                    block.append(x)
                x += 1
            rng.shuffle(block)
            for v in block:
                yield v + 1

    return EnumerationStream(run, generator=("shuffle", seed, repr(density), window))


def random_dyadic(rng: random.Random, bits: int = 40) -> Dyadic:
    """Uniform dyadic in ``[0, 1)`` with at most ``bits`` bits."""
    return Dyadic(rng.getrandbits(bits), bits)


def _identity() -> EnumerationStream:
    return EnumerationStream.from_function(lambda t: t + 1, generator=("identity",))


def _residue(modulus: str, residue: str) -> EnumerationStream:
    m, r = int(modulus), int(residue)
    return EnumerationStream.from_function(lambda t: t + 1 if t % m == r else 0, generator=("residue", m, r))


def _shuffle(seed: str, density: str = "0.5", window: str = "8") -> EnumerationStream:
    return shuffled_injective(int(seed), float(density), int(window))


GENERATORS: dict[str, Callable[..., EnumerationStream]] = {
    "identity": _identity,
    "residue": _residue,
    "shuffle": _shuffle,
}


def generator_stream(name: str, *params) -> EnumerationStream:
    """Rebuild a generator-backed stream from its id and parameters."""
    try:
        factory = GENERATORS[name]
    except KeyError:
        raise FormatError(f"unknown stream generator {name!r}") from None
    try:
        return factory(*(str(p) for p in params))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad parameters for generator {name!r}: {exc}") from exc
