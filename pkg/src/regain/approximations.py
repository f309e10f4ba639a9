"""Nondecreasing dyadic approximation sequences and their transforms.

Everything here is exact. A witness of a sequence ``(a_n)`` converging to
``alpha`` is an index ``n`` with ``alpha - a_n < 2**-n``; since the true limit
is only known for synthetic inputs, witness detection comes in two modes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import chain, count, repeat
from typing import Callable, Iterable, Iterator, Sequence

from .enumerations import EnumerationStream, RateFunction
from .errors import (
    HorizonExhausted,
    InvariantViolation,
    MonotonicityError,
    PreconditionError,
    RateFlagError,
)
from .foundation import Dyadic, FinSet, bits_value, pair, set_to_real, unpair

__all__ = [
    "ApproxSeq",
    "StrongArray",
    "WitnessReport",
    "CatchupResult",
    "witnesses",
    "transform_1_to_3",
    "transform_4_to_1",
    "plateau_ends",
    "index_compress",
    "index_extract",
    "coenumerate_misses",
    "enumerate_witnesses_with_modulus",
    "speedup_via_bound",
    "modulus_failures",
    "array_to_seq",
    "catchup_indices",
    "solovay_transfer",
    "bracket_strings",
]

MONOTONE = ("nondecreasing", "increasing")


class ApproxSeq:
    """A lazily evaluated, memoized sequence of dyadics with enforced monotonicity.

    Pulling a value that breaks the declared monotonicity raises
    :class:`MonotonicityError`; there is no way to observe a violating value.
    """

    def __init__(
        self,
        factory: Callable[[], Iterator[Dyadic]],
        monotone: str = "nondecreasing",
        *,
        table: Sequence[Dyadic] | None = None,
    ):
        if monotone not in MONOTONE:
            raise ValueError(f"monotonicity must be one of {MONOTONE}")
        self._factory = factory
        self.monotone = monotone
        self.table = tuple(table) if table is not None else None
        self._it: Iterator[Dyadic] | None = None
        self._cache: list[Dyadic] = []
        self.index: Callable[[int], int] | None = None

    @classmethod
    def from_function(cls, fn: Callable[[int], Dyadic], monotone: str = "nondecreasing") -> ApproxSeq:
        return cls(lambda: (Dyadic.coerce(fn(n)) for n in count()), monotone)

    @classmethod
    def from_values(cls, values: Iterable, monotone: str = "nondecreasing") -> ApproxSeq:
        """Finitely supported sequence: the last value repeats forever."""
        values = tuple(Dyadic.coerce(v) for v in values)
        if not values:
            raise ValueError("need at least one value")
        if monotone == "increasing":
            raise ValueError("an eventually constant sequence cannot be increasing")
        return cls(lambda: chain(values, repeat(values[-1])), monotone, table=values)

    def clone(self) -> ApproxSeq:
        out = ApproxSeq(self._factory, self.monotone, table=self.table)
        out.index = self.index
        return out

    def _fill(self, k: int) -> None:
        if self._it is None:
            self._it = self._factory()
        cache, it = self._cache, self._it
        strict = self.monotone == "increasing"
        while len(cache) <= k:
            value = next(it)
            if cache:
                prev = cache[-1]
                if value < prev or (strict and value == prev):
                    raise MonotonicityError(
                        f"value {value} at index {len(cache)} breaks {self.monotone} after {prev}"
                    )
            cache.append(value)

    def __getitem__(self, k):
        if isinstance(k, slice):
            if k.stop is None or k.stop < 0:
                raise ValueError("sequence slices need an explicit non-negative stop")
            if k.stop:
                self._fill(k.stop - 1)
            return self._cache[k]
        if k < 0:
            raise IndexError("indices are natural numbers")
        if k >= len(self._cache):
            self._fill(k)
        return self._cache[k]

    def prefix(self, n: int) -> list[Dyadic]:
        return self[:n]

    def __iter__(self) -> Iterator[Dyadic]:
        for k in count():
            yield self[k]


@dataclass
class StrongArray:
    """Finite sets ``A_n ⊆ {0..n-1}`` with ``2^-A_n`` nondecreasing in ``n``."""

    at_fn: Callable[[int], Iterable[int]]

    def at(self, n: int) -> FinSet:
        s = self.at_fn(n)
        s = s if isinstance(s, FinSet) else FinSet(s)
        if s.elements and s.elements[-1] >= n:
            raise InvariantViolation("strong array", f"A_{n} = {s} is not inside {{0..{n - 1}}}")
        return s

    @classmethod
    def from_enumeration(cls, f: EnumerationStream) -> StrongArray:
        """``A_n = Enum(f)[n] ∩ {0..n-1}``."""

        def at(n: int) -> FinSet:
            return FinSet(c - 1 for c in f[:n] if c and c - 1 < n)

        return cls(at)


@dataclass
class WitnessReport:
    horizon: int
    witnesses: list[int]
    mode: str

    def __post_init__(self):
        if self.mode not in ("exact_limit", "horizon_necessary"):
            raise ValueError(f"unknown witness mode {self.mode!r}")

    @property
    def confirmed(self) -> bool:
        return self.mode == "exact_limit"

    def to_text(self) -> str:
        return json.dumps(
            {"mode": self.mode, "horizon": self.horizon, "witnesses": self.witnesses},
            separators=(",", ":"),
        )

    @classmethod
    def from_text(cls, text: str) -> WitnessReport:
        data = json.loads(text)
        return cls(int(data["horizon"]), [int(w) for w in data["witnesses"]], data["mode"])


def witnesses(
    seq: ApproxSeq,
    limit: Dyadic | None,
    horizon: int,
    exponent: Callable[[int], int] | None = None,
) -> WitnessReport:
    """Indices ``n < horizon`` with ``limit - a_n < 2**-exponent(n)`` (``exponent`` defaults to id).

    Without a limit, ``a_{horizon-1}`` stands in for it; that only gives a
    necessary condition and the report says so.
    """
    exponent = exponent or (lambda n: n)
    values = seq[:horizon]
    if limit is None:
        if not values:
            return WitnessReport(horizon, [], "horizon_necessary")
        ref, mode = values[-1], "horizon_necessary"
    else:
        ref, mode = Dyadic.coerce(limit), "exact_limit"
        for n, a in enumerate(values):
            if a > ref:
                raise PreconditionError(f"limit {ref} is below a_{n} = {a}")
    found = [n for n, a in enumerate(values) if ref - a < Dyadic.pow2(-exponent(n))]
    return WitnessReport(horizon, found, mode)


def _running_max(f: RateFunction) -> Callable[[int], int]:
    memo: list[int] = []

    def upto(n: int) -> int:
        while len(memo) <= n:
            v = f(len(memo))
            memo.append(v if not memo else max(memo[-1], v))
        return memo[n]

    return upto


def transform_1_to_3(b: ApproxSeq, f: RateFunction) -> ApproxSeq:
    """Increasing sequence catching up at the speed ``2**-f(n)`` infinitely often.

    With ``g(n) = 1 + n + max(f(0..n))`` the output is
    ``a_n = b_{g(n+1)} - 2**-g(n)``.
    """
    if not f.unbounded:
        raise RateFlagError("transform_1_to_3 needs an unbounded f")
    fmax = _running_max(f)

    def g(n: int) -> int:
        return 1 + n + fmax(n)

    def run() -> Iterator[Dyadic]:
        for n in count():
            yield b[g(n + 1)] - Dyadic.pow2(-g(n))

    out = ApproxSeq(run, "increasing")
    out.index = g
    return out


def plateau_ends(f: RateFunction, search_horizon: int = 10**6) -> Callable[[int], int]:
    """``g(0) = max{m : f(m) = f(0)}``, ``g(n+1) = max{m : f(m) = f(g(n) + 1)}``.

    The right end of each plateau of a nondecreasing unbounded ``f``. The scan
    fails past ``search_horizon`` rather than running forever on a function
    that is eventually constant.
    """
    if f.monotone not in MONOTONE or not f.unbounded:
        raise RateFlagError("plateau search needs a nondecreasing, unbounded f")
    ends: list[int] = []

    def right_end(start: int) -> int:
        v = f(start)
        m = start
        while True:
            nxt = f(m + 1)
            if nxt < v:
                raise RateFlagError(f"f decreases at {m + 1}")
            if nxt > v:
                return m
            m += 1
            if m - start > search_horizon:
                raise HorizonExhausted(f"plateau at value {v} extends past {search_horizon}")

    def g(n: int) -> int:
        while len(ends) <= n:
            ends.append(right_end(ends[-1] + 1 if ends else 0))
        return ends[n]

    return g


def transform_4_to_1(b: ApproxSeq, f: RateFunction, search_horizon: int = 10**6) -> ApproxSeq:
    """``a_n = b_{g(n)}`` with ``g`` the plateau ends of ``f``."""
    g = plateau_ends(f, search_horizon)

    def run() -> Iterator[Dyadic]:
        for n in count():
            yield b[g(n)]

    out = ApproxSeq(run, "nondecreasing")
    out.index = g
    return out


def index_compress(a: ApproxSeq, r: RateFunction) -> ApproxSeq:
    """``b_n = a_{r(n)}`` for increasing ``r``."""
    if r.monotone != "increasing":
        raise RateFlagError("index_compress needs an increasing r")

    def run() -> Iterator[Dyadic]:
        prev = None
        for n in count():
            k = r(n)
            if prev is not None and k <= prev:
                raise RateFlagError(f"r not increasing at {n}: {prev} -> {k}")
            prev = k
            yield a[k]

    out = ApproxSeq(run, "nondecreasing")
    out.index = r
    return out


def index_extract(a: ApproxSeq, b: ApproxSeq, horizon: int) -> RateFunction:
    """Increasing ``r`` with ``a_{r(n)} >= b_n``.

    ``r(0) = min{m : a_m >= b_0}``, ``r(n+1) = min{m > r(n) : a_m >= b_{n+1}}``;
    each search stops at ``horizon`` indices of ``a``.
    """
    memo: list[int] = []

    def r(n: int) -> int:
        while len(memo) <= n:
            i = len(memo)
            target = b[i]
            m = memo[-1] + 1 if memo else 0
            while a[m] < target:
                m += 1
                if m >= horizon:
                    raise HorizonExhausted(f"domination not observed: no a_m >= b_{i} = {target} below {horizon}")
            memo.append(m)
        return memo[n]

    return RateFunction(r, "increasing", True, "extracted")


def coenumerate_misses(a: ApproxSeq, e: int) -> EnumerationStream:
    """Enumerate the non-witnesses: stage ``<m,n>`` emits ``n`` if ``a_m - a_n >= 2**-n``, else ``e``."""

    def code(k: int) -> int:
        m, n = unpair(k)
        if m > n and a[m] - a[n] >= Dyadic.pow2(-n):
            return n + 1
        return e + 1

    return EnumerationStream.from_function(code)


def enumerate_witnesses_with_modulus(a: ApproxSeq, b: ApproxSeq, d: int) -> EnumerationStream:
    """Enumerate the witnesses of ``a`` given ``b`` with ``|alpha - b_m| < 2**-m``.

    Stage ``<m,n>`` emits ``n`` if ``b_m - a_n + 2**-m < 2**-n``, else the
    known witness ``d``.
    """

    def code(k: int) -> int:
        m, n = unpair(k)
        if b[m] - a[n] + Dyadic.pow2(-m) < Dyadic.pow2(-n):
            return n + 1
        return d + 1

    return EnumerationStream.from_function(code)


def speedup_via_bound(a: ApproxSeq, r: Callable[[int], int]) -> ApproxSeq:
    """``b_n = a_{r(n)}`` for an ``r`` dominating the witness principal function.

    The domination is the caller's promise; :func:`modulus_failures` checks
    the resulting modulus on a finite range.
    """

    def run() -> Iterator[Dyadic]:
        for n in count():
            yield a[r(n)]

    out = ApproxSeq(run, "nondecreasing")
    out.index = r
    return out


def modulus_failures(seq: ApproxSeq, limit: Dyadic, horizon: int) -> list[int]:
    """Indices ``n < horizon`` where ``limit - seq_n < 2**-n`` fails."""
    limit = Dyadic.coerce(limit)
    return [n for n, v in enumerate(seq[:horizon]) if not limit - v < Dyadic.pow2(-n)]


def array_to_seq(arr: StrongArray) -> ApproxSeq:
    """``a_n = 2^-A_n``; the monotonicity check enforces the array's second condition."""
    return ApproxSeq(lambda: (set_to_real(arr.at(n)) for n in count()), "nondecreasing")


@dataclass
class CatchupResult:
    """Index function ``s`` on ``[0, horizon)`` plus how the threshold was found."""

    values: list[int]
    threshold: int
    threshold_discovered: bool
    checked: list[int] = field(default_factory=list)
    violations: list[tuple[int, str]] = field(default_factory=list)

    @property
    def rate(self) -> RateFunction:
        return RateFunction.from_values(self.values, "increasing", True)


def catchup_indices(
    arr: StrongArray,
    r: Callable[[int], int],
    reference: FinSet,
    horizon: int,
    threshold: int | None = None,
    search_horizon: int | None = None,
) -> CatchupResult:
    """Increasing ``s`` with ``B_{s(n)} ∩ [n] = A ∩ [n]`` at the ``r``-witnesses past the threshold.

    Below the threshold ``N`` the function is the identity; from ``N`` on,
    ``s(n)`` is the least ``k > s(n-1)`` with
    ``2^-(B_k ∩ [n]) >= 2^-(B_{r(n)} ∩ [n]) + 2**-n``. When ``N`` is not given
    it is taken to be one past the last ``n < horizon`` at which
    ``B_{r(n)} ∩ [n] = A ∩ [n]``. At each checked witness the four-way case
    analysis is replayed, and any case that should be impossible is recorded
    as a violation.
    """
    if search_horizon is None:
        search_horizon = 64 * horizon + 64
    alpha = set_to_real(reference)

    def cut(s: FinSet, n: int) -> Dyadic:
        return set_to_real(x for x in s if x < n)

    truth = [cut(reference, n) for n in range(horizon)]
    discovered = threshold is None
    if discovered:
        threshold = 0
        for n in range(horizon):
            if cut(arr.at(r(n)), n) == truth[n]:
                threshold = n + 1

    values: list[int] = []
    violations: list[tuple[int, str]] = []
    for n in range(horizon):
        if n < threshold:
            values.append(n)
            continue
        floor_val = cut(arr.at(r(n)), n)
        if truth[n] + Dyadic.pow2(-n) <= floor_val:
            violations.append((n, "case (i): approximation cut exceeds the limit cut"))
        target = floor_val + Dyadic.pow2(-n)
        k = values[-1] + 1 if values else 0
        while cut(arr.at(k), n) < target:
            k += 1
            if k > search_horizon:
                raise HorizonExhausted(f"min-search for s({n}) passed {search_horizon}")
        values.append(k)

    checked = []
    for n in range(threshold, horizon):
        if not alpha - set_to_real(arr.at(r(n))) < Dyadic.pow2(-n):
            continue
        checked.append(n)
        got = cut(arr.at(values[n]), n)
        if got == truth[n]:
            continue
        if truth[n] + Dyadic.pow2(-n) <= got:
            violations.append((n, "case (iii): s-cut exceeds the limit cut"))
        else:
            violations.append((n, "case (iv): s-cut falls short of the limit cut"))
    return CatchupResult(values, threshold, discovered, checked, violations)


def solovay_transfer(f: Callable[[Dyadic], Dyadic | None], b: ApproxSeq) -> ApproxSeq:
    """``a_n = max(f(b_0), ..., f(b_n))``.

    ``f`` is the translation function of a Solovay reduction; returning
    ``None`` or raising ``KeyError`` marks it undefined, which is an error.
    The constant ``c`` of the reduction does not enter the construction, only
    the witness bookkeeping (``beta - b_n < 2**-(n+c)`` gives
    ``alpha - a_n < 2**-n``).
    """

    def evaluate(q: Dyadic, i: int) -> Dyadic:
        try:
            value = f(q)
        except KeyError:
            value = None
        if value is None:
            raise PreconditionError(f"translation undefined on b_{i} = {q}")
        return Dyadic.coerce(value)

    def run() -> Iterator[Dyadic]:
        best = None
        for i in count():
            v = evaluate(b[i], i)
            best = v if best is None or v > best else best
            yield best

    return ApproxSeq(run, "nondecreasing")


def bracket_strings(a: Dyadic, n: int) -> tuple[str, str]:
    """Length-``n`` strings ``u, v`` with ``0.u <= a < 0.u + 2**-n`` and ``0.v = 0.u + 2**-n``.

    ``v = u`` when ``u`` is all ones.
    """
    a = Dyadic.coerce(a)
    if a < 0 or a >= 1:
        raise PreconditionError(f"bracket_strings needs 0 <= a < 1, got {a}")
    if n == 0:
        return "", ""
    u = a.floor_scaled(n)
    v = u if u == (1 << n) - 1 else u + 1
    return format(u, f"0{n}b"), format(v, f"0{n}b")
