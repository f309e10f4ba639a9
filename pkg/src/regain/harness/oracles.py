"""Reference implementations written straight from the definitions.

No sparse tables, no incremental sums, no shared helpers from the optimized
modules beyond input types. Rational arithmetic goes through
:class:`fractions.Fraction`, so the dyadic code is checked against an
independent number type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import compress
from typing import Callable, Sequence

from ..errors import PreconditionError
from ..foundation import Dyadic
from ..machines import PrefixMachine

__all__ = [
    "SIZE_LIMITS",
    "OracleSuite",
    "enum_prefix_oracle",
    "split_oracle",
    "degree_oracle",
    "omega_oracle",
    "witness_oracle",
    "frac",
]

SIZE_LIMITS = {"horizon": 20_000, "value": 4_096, "machine": 64}

INF = float("inf")


def frac(x: Dyadic) -> Fraction:
    return Fraction(x.mantissa, 1 << x.exponent)


def _check_size(horizon: int, max_value: int = 0) -> None:
    if horizon > SIZE_LIMITS["horizon"] or max_value > SIZE_LIMITS["value"]:
        raise PreconditionError(
            f"instance exceeds oracle limits (horizon {horizon}, value {max_value}; limits {SIZE_LIMITS})"
        )


def enum_prefix_oracle(codes: Sequence[int], t: int) -> set[int]:
    """Everything enumerated at stages ``0..t-1``."""
    out = set()
    for k in range(t):
        if k < len(codes) and codes[k] > 0:
            out.add(codes[k] - 1)
    return out


def split_oracle(codes: Sequence[int], horizon: int) -> tuple[list[int], list[int], list[int]]:
    """Dense splitting run: ``(g, h, final rows s_0..s_R)``."""
    codes = list(codes[:horizon])
    top = max(codes, default=0)
    last = max((t for t, c in enumerate(codes) if c), default=-1)
    _check_size(horizon, top)
    rows = top + 2
    s = list(range(rows))
    g = [0] * horizon
    h = [0] * horizon
    for t in range(last + 1):
        c = codes[t]
        if c == 0:
            continue
        n = c - 1
        k = 0
        while not s[k] > n:
            k += 1
        if k % 2 == 0:
            h[t] = c
        else:
            g[t] = c
        s[k + 1 :] = [x + t + 1 for x in s[k + 1 :]]
    return g, h, s


@dataclass
class DegreeOracle:
    """Dense-in-time record of the degree-preserving run: ``g`` and the jump log."""

    g: list[int]
    rows: list[int]
    jumps: list[int]

    def value(self, i: int, t: int) -> int:
        """``s_i[t] = i + Σ {jump(t') : t' < t, f(t') < i}``, summed from the log."""
        return i + sum(compress(self.jumps[:t], map(i.__gt__, self.rows[:t])))


def degree_oracle(values: Sequence[int], horizon: int) -> DegreeOracle:
    """Degree-preserving run on ``f(0..horizon-1)`` with every row value summed from scratch."""
    values = list(values[:horizon])
    _check_size(horizon)
    if len(set(values)) != len(values):
        raise PreconditionError("f is not injective")
    out = DegreeOracle([], [], [])
    for t, v in enumerate(values):
        out.g.append(out.value(v, t))
        out.rows.append(v)
        out.jumps.append(max([t] + out.g) + 1)
    return out


@dataclass
class OmegaOracle:
    ell: list[list[int]] = field(default_factory=list)
    r: list[list[int]] = field(default_factory=list)
    w: list[list[float]] = field(default_factory=list)
    a: list[Fraction] = field(default_factory=list)


def _bits(x: Fraction, m: int) -> str:
    """First ``m`` bits of the non-terminating expansion of the ``y ∈ (0, 1]`` congruent to ``x``.

    Those bits spell ``ceil(y · 2^m) - 1``.
    """
    y = x - (x.numerator // x.denominator)
    if y == 0:
        y = Fraction(1)
    scaled = y * (1 << m)
    top = -((-scaled.numerator) // scaled.denominator)
    return format(top - 1, f"0{m}b") if m else ""


def omega_oracle(machine: PrefixMachine, horizon: int) -> OmegaOracle:
    """Recompute ``ell``, ``r``, ``w`` and ``a`` from the definitions, every stage from scratch."""
    _check_size(horizon)
    if len(machine) > SIZE_LIMITS["machine"]:
        raise PreconditionError("machine too large for the oracle")
    progs = machine.entries
    H = horizon
    out = OmegaOracle()
    if H == 0:
        return out
    out.ell.append([0] * (H + 1))
    out.r.append(list(range(H + 1)))
    out.w.append([INF] * (H + 1))
    out.a.append(Fraction(0))
    for t in range(1, H):
        prev_a = out.a[t - 1]

        K: dict[str, int] = {}
        for u, v in progs[:t]:
            K[v] = min(K.get(v, len(u)), len(u))
        bits = _bits(prev_a, 2 * t + 2 * len(progs) + 2)
        ell = [0] * (H + 1)
        for n in range(1, t + 1):
            m = ell[n - 1] + 1
            while K.get(bits[:m], INF) <= m:
                m += 1
            ell[n] = m
        changed = [i for i in range(t) if ell[i] != out.ell[t - 1][i]]
        if not changed:
            r = list(out.r[t - 1])
            w = list(out.w[t - 1])
        else:
            i_t = min(changed)
            r = [out.r[t - 1][n] if n <= i_t else out.r[t - 1][n] + t for n in range(H + 1)]
            w = [min(out.w[t - 1][n], r[i_t]) if n < t else INF for n in range(H + 1)]
        a = Fraction(0)
        for n in range(t):
            if n < len(progs) and w[n] != INF:
                a += Fraction(1, 2 ** int(w[n])) * Fraction(1, 2 ** len(progs[n][0]))
        out.ell.append(ell)
        out.r.append(r)
        out.w.append(w)
        out.a.append(a)
    return out


def witness_oracle(values: Sequence[Dyadic], limit: Dyadic, exponent: Callable[[int], int] = lambda n: n) -> list[int]:
    """Naive rational scan for ``limit - a_n < 2**-exponent(n)``."""
    L = frac(limit)
    return [n for n, v in enumerate(values) if L - frac(v) < Fraction(1, 2 ** exponent(n))]


class OracleSuite:
    """Named reference implementations, looked up by construction name."""

    registry = {
        "enum_prefix": enum_prefix_oracle,
        "split_stream": split_oracle,
        "degree": degree_oracle,
        "omega": omega_oracle,
        "witness": witness_oracle,
    }

    def __getitem__(self, name: str):
        try:
            return self.registry[name]
        except KeyError:
            raise KeyError(f"no oracle named {name!r}; have {sorted(self.registry)}") from None

    def names(self) -> list[str]:
        return sorted(self.registry)
