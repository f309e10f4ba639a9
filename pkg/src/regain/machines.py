"""Toy prefix-free machines and their time-bounded complexity approximations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FormatError, PreconditionError
from .foundation import Dyadic

__all__ = ["PrefixMachine", "k_approx", "shortest_programs", "sample_machine", "INF"]

INF = math.inf


@dataclass(frozen=True)
class PrefixMachine:
    """A finite program table with a prefix-free domain.

    ``entries[n] = (h(n), output)``: the order of the entries is the domain
    enumeration ``h``. The domain weight ``Σ 2^-|u|`` must stay strictly
    below 1.
    """

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        programs = [u for u, _ in self.entries]
        for u, v in self.entries:
            if set(u) - {"0", "1"} or set(v) - {"0", "1"}:
                raise PreconditionError(f"non-binary entry {u!r} -> {v!r}")
        if len(set(programs)) != len(programs):
            raise PreconditionError("program listed twice")
        ordered = sorted(programs)
        for a, b in zip(ordered, ordered[1:]):
            if b.startswith(a):
                raise PreconditionError(f"domain not prefix-free: {a!r} is a prefix of {b!r}")
        if self.weight >= 1:
            raise PreconditionError(f"domain weight {self.weight} is not below 1")

    @classmethod
    def build(cls, entries: Iterable[tuple[str, str]]) -> PrefixMachine:
        return cls(tuple((str(u), str(v)) for u, v in entries))

    @property
    def weight(self) -> Dyadic:
        return sum((Dyadic.pow2(-len(u)) for u, _ in self.entries), Dyadic(0))

    def __len__(self) -> int:
        return len(self.entries)

    def h(self, n: int) -> str | None:
        """The ``n``-th program, or ``None`` once the finite domain is exhausted."""
        return self.entries[n][0] if n < len(self.entries) else None

    def output(self, program: str) -> str | None:
        for u, v in self.entries:
            if u == program:
                return v
        return None

    def to_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.entries)

    @classmethod
    def parse(cls, text: str) -> PrefixMachine:
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) == 1:
                parts.append("")
            if len(parts) != 2:
                raise FormatError(f"line {lineno}: expected '<program-bits> <output-bits>'")
            entries.append((parts[0], parts[1]))
        return cls.build(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> PrefixMachine:
        return cls.parse(Path(path).read_text())


def k_approx(machine: PrefixMachine, v: str, t: int) -> float | int:
    """Least ``|u|`` over programs ``h(0..t-1)`` printing ``v``; ``INF`` if none."""
    best: float | int = INF
    for u, out in machine.entries[:t]:
        if out == v and len(u) < best:
            best = len(u)
    return best


def shortest_programs(machine: PrefixMachine, t: int) -> dict[str, int]:
    """``{v: K(v)[t]}`` for every output seen among the first ``t`` programs."""
    best: dict[str, int] = {}
    for u, out in machine.entries[:t]:
        if out not in best or len(u) < best[out]:
            best[out] = len(u)
    return best


def sample_machine(
    rng,
    size: int,
    max_weight: Dyadic = Dyadic(15, 4),
    lengths: Sequence[int] = (3, 4, 5, 6, 7),
) -> PrefixMachine:
    """Random prefix-free machine with ``size`` entries and domain weight at most ``max_weight``.

    Outputs mix runs of ones, runs of zeros and random strings. Runs are at
    least as long as their program (so they compress) and, where possible, no
    longer than their position in the enumeration.
    """
    for _ in range(100):
        entries: list[tuple[str, str]] = []
        weight = Dyadic(0)
        for _ in range(200 * size):
            if len(entries) == size:
                break
            n = rng.choice(lengths)
            u = "".join(rng.choice("01") for _ in range(n))
            if any(u.startswith(p) or p.startswith(u) for p, _ in entries):
                continue
            if weight + Dyadic.pow2(-n) > max_weight:
                continue
            kind = rng.random()
            # a run no longer than the entry's position can shift guesses that are already in play
            run = rng.randint(n, max(n, len(entries)))
            if kind < 0.35:
                out = "1" * run
            elif kind < 0.7:
                out = "0" * run
            else:
                out = "".join(rng.choice("01") for _ in range(rng.randint(1, 10)))
            entries.append((u, out))
            weight = weight + Dyadic.pow2(-n)
        if len(entries) == size:
            return PrefixMachine.build(entries)
    raise PreconditionError(f"could not place {size} programs under weight {max_weight}")
