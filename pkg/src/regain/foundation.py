"""Exact dyadic arithmetic, pairing, finite sets and binary-expansion helpers.

Every value produced anywhere in the package is a finite sum of powers of two,
so a dyadic rational (integer mantissa over a power of two) is the only number
type we need. Bit strings are plain ``str`` objects over ``"01"``.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Iterator

__all__ = [
    "Dyadic",
    "FinSet",
    "pair",
    "unpair",
    "log_len",
    "set_to_real",
    "real_prefix",
    "is_prefix",
    "bits_value",
]


class Dyadic:
    """The exact value ``mantissa / 2**exponent``, kept in canonical form.

    Canonical means ``exponent == 0`` or ``mantissa`` is odd, so equal values
    have equal representations and hash alike.
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if exponent < 0:
            raise ValueError("exponent must be a natural number")
        if mantissa == 0:
            exponent = 0
        elif exponent:
            tz = (mantissa & -mantissa).bit_length() - 1
            if tz:
                tz = min(tz, exponent)
                mantissa >>= tz
                exponent -= tz
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def pow2(cls, k: int) -> Dyadic:
        """Return ``2**k`` for any integer ``k``."""
        if k >= 0:
            return cls(1 << k, 0)
        return cls(1, -k)

    @classmethod
    def coerce(cls, value) -> Dyadic:
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, str):
            return cls.parse(value)
        raise TypeError(f"cannot interpret {value!r} as a dyadic rational")

    _TEXT = re.compile(r"^\s*(-?\d+)\s*(?:/\s*2\^(\d+))?\s*$")

    @classmethod
    def parse(cls, text: str) -> Dyadic:
        """Parse ``m/2^e`` (or a bare integer ``m``)."""
        match = cls._TEXT.match(text)
        if not match:
            raise ValueError(f"malformed dyadic {text!r}")
        return cls(int(match.group(1)), int(match.group(2) or 0))

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.mantissa)
        return f"{self.mantissa}/2^{self.exponent}"

    def __repr__(self) -> str:
        return f"Dyadic({self})"

    def scaled(self, k: int) -> Dyadic:
        """Multiply by ``2**-k`` (``k`` may be negative)."""
        if k >= 0:
            return Dyadic(self.mantissa, self.exponent + k)
        return Dyadic(self.mantissa << (-k), self.exponent)

    def numerator_at(self, exponent: int) -> int:
        """Integer ``N`` with ``self == N / 2**exponent``; exponent must be large enough."""
        if exponent < self.exponent:
            raise ValueError(f"{self} is not a multiple of 2^-{exponent}")
        return self.mantissa << (exponent - self.exponent)

    def floor_scaled(self, n: int) -> int:
        """``floor(self * 2**n)``."""
        if n >= self.exponent:
            return self.mantissa << (n - self.exponent)
        return self.mantissa >> (self.exponent - n)

    def ceil_scaled(self, n: int) -> int:
        """``ceil(self * 2**n)``."""
        return -((-self).floor_scaled(n))

    def _aligned(self, other: Dyadic) -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return (
            self.mantissa << (e - self.exponent),
            other.mantissa << (e - other.exponent),
            e,
        )

    def __add__(self, other) -> Dyadic:
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other) -> Dyadic:
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b, e = self._aligned(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other) -> Dyadic:
        if isinstance(other, int):
            return Dyadic(other) - self
        return NotImplemented

    def __neg__(self) -> Dyadic:
        return Dyadic(-self.mantissa, self.exponent)

    def __mul__(self, other) -> Dyadic:
        if isinstance(other, int):
            return Dyadic(self.mantissa * other, self.exponent)
        if isinstance(other, Dyadic):
            return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)
        return NotImplemented

    __rmul__ = __mul__

    def _cmp(self, other) -> int:
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, int):
            return self.exponent == 0 and self.mantissa == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.mantissa, self.exponent))

    def __lt__(self, other) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other) -> bool:
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __bool__(self) -> bool:
        return self.mantissa != 0

    def __reduce__(self):
        return (Dyadic, (self.mantissa, self.exponent))


ZERO = Dyadic(0)
ONE = Dyadic(1)


class FinSet:
    """Immutable finite set of naturals, stored as a strictly increasing tuple."""

    __slots__ = ("elements", "_members")

    def __init__(self, elements: Iterable[int] = ()):
        members = frozenset(elements)
        if any(x < 0 for x in members):
            raise ValueError("FinSet holds natural numbers only")
        object.__setattr__(self, "_members", members)
        object.__setattr__(self, "elements", tuple(sorted(members)))

    def __setattr__(self, name, value):
        raise AttributeError("FinSet is immutable")

    @classmethod
    def range(cls, n: int) -> FinSet:
        return cls(range(n))

    def __contains__(self, x) -> bool:
        return x in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other) -> bool:
        if isinstance(other, FinSet):
            return self._members == other._members
        if isinstance(other, (set, frozenset)):
            return self._members == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._members)

    def __or__(self, other) -> FinSet:
        return FinSet(self._members | _members(other))

    def __and__(self, other) -> FinSet:
        return FinSet(self._members & _members(other))

    def __sub__(self, other) -> FinSet:
        return FinSet(self._members - _members(other))

    def __le__(self, other) -> bool:
        return self._members <= _members(other)

    def issubset(self, other) -> bool:
        return self._members <= _members(other)

    def restrict(self, n: int) -> FinSet:
        """The set ``self ∩ {0, ..., n-1}``."""
        return FinSet(x for x in self.elements if x < n)

    def principal(self, n: int) -> int:
        """The ``n``-th element in increasing order (principal function)."""
        return self.elements[n]

    def characteristic(self, n: int) -> str:
        """Characteristic string of the set on ``{0, ..., n-1}``."""
        return "".join("1" if i in self._members else "0" for i in range(n))

    def to_real(self) -> Dyadic:
        return set_to_real(self)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.elements)) + "}"

    def __repr__(self) -> str:
        return f"FinSet({self})"

    @classmethod
    def parse(cls, text: str) -> FinSet:
        body = text.strip()
        if not (body.startswith("{") and body.endswith("}")):
            raise ValueError(f"malformed set {text!r}")
        body = body[1:-1].strip()
        if not body:
            return cls()
        values = [int(tok) for tok in body.split(",")]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"set elements must be strictly increasing: {text!r}")
        return cls(values)


def _members(obj) -> frozenset:
    if isinstance(obj, FinSet):
        return obj._members
    return frozenset(obj)


def pair(m: int, n: int) -> int:
    """Cantor pairing ``(m+n)(m+n+1)/2 + n``."""
    s = m + n
    return s * (s + 1) // 2 + n


def unpair(k: int) -> tuple[int, int]:
    """Inverse of :func:`pair`."""
    w = (math.isqrt(8 * k + 1) - 1) // 2
    n = k - w * (w + 1) // 2
    return w - n, n


def log_len(n: int) -> int:
    """Length of the binary representation of ``n``; ``log_len(0) == 1``."""
    return max(1, n.bit_length())


def set_to_real(elements: Iterable[int]) -> Dyadic:
    """``sum(2**-(a+1) for a in elements)``, exactly."""
    elements = list(elements)
    if not elements:
        return ZERO
    top = max(elements) + 1
    return Dyadic(sum(1 << (top - a - 1) for a in set(elements)), top)


def real_prefix(x: Dyadic, n: int) -> str:
    """First ``n`` bits of the binary expansion of ``x`` with infinitely many ones.

    For a dyadic ``x`` this is the non-terminating expansion, so ``1/2`` reads
    ``0111...``. Only ``0 < x <= 1`` is accepted.
    """
    x = Dyadic.coerce(x)
    if x <= 0 or x > 1:
        raise ValueError(f"real_prefix needs 0 < x <= 1, got {x}")
    if n == 0:
        return ""
    return format(x.ceil_scaled(n) - 1, f"0{n}b")


def is_prefix(u: str, v: str) -> bool:
    return v.startswith(u)


def bits_value(u: str) -> Dyadic:
    """The dyadic ``0.u``."""
    if not u:
        return ZERO
    return Dyadic(int(u, 2), len(u))
