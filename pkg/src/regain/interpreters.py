"""A step-bounded family of partial functions written in a tiny expression language.

One expression per line; line ``e`` defines ``phi_e``. Grammar::

    expr := "affine" A B                 # A*n + B
          | "poly" c0 c1 ... ["/" d]     # floor((c0 + c1*n + c2*n^2 + ...) / d)
          | "patch" n=v[,n=v...] expr    # table overrides on top of expr
          | "partial" N expr             # defined only for n < N
          | "slow" K expr                # needs K times as many steps
          | "diverge"                    # defined nowhere

A defined value at input ``n`` costs ``n + 1`` steps (times every enclosing
``slow`` factor), so ``phi_e(n)[t]`` converges iff that cost is at most ``t``.
Larger budgets never lose a converged value.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .errors import FormatError

__all__ = ["Expr", "parse_expr", "StepInterpreter", "DEFAULT_FAMILY"]


@dataclass(frozen=True)
class Expr:
    """Compiled expression: ``value(n)`` (``None`` when undefined) and a step multiplier."""

    source: str
    value: Callable[[int], int | None]
    cost: int = 1


def _affine(args: list[str]) -> tuple[Expr, list[str]]:
    a, b = int(args[0]), int(args[1])
    return Expr("", lambda n: a * n + b), args[2:]


def _poly(args: list[str]) -> tuple[Expr, list[str]]:
    coeffs = []
    rest = list(args)
    while rest and rest[0].lstrip("-").isdigit():
        coeffs.append(int(rest.pop(0)))
    if not coeffs:
        raise FormatError("poly needs at least one coefficient")
    d = 1
    if rest and rest[0] == "/":
        d = int(rest[1])
        rest = rest[2:]
        if d <= 0:
            raise FormatError("poly divisor must be positive")

    def value(n: int) -> int:
        total = 0
        for c in reversed(coeffs):
            total = total * n + c
        return total // d

    return Expr("", value), rest


def _parse(tokens: list[str]) -> tuple[Expr, list[str]]:
    if not tokens:
        raise FormatError("empty expression")
    head, args = tokens[0], tokens[1:]
    try:
        if head == "affine":
            return _affine(args)
        if head == "poly":
            return _poly(args)
        if head == "diverge":
            return Expr("", lambda n: None), args
        if head == "patch":
            overrides = {}
            for item in args[0].split(","):
                k, v = item.split("=")
                overrides[int(k)] = int(v)
            inner, rest = _parse(args[1:])
            return Expr("", lambda n: overrides[n] if n in overrides else inner.value(n), inner.cost), rest
        if head == "partial":
            bound = int(args[0])
            inner, rest = _parse(args[1:])
            return Expr("", lambda n: inner.value(n) if n < bound else None, inner.cost), rest
        if head == "slow":
            factor = int(args[0])
            if factor < 1:
                raise FormatError("slow factor must be positive")
            inner, rest = _parse(args[1:])
            return Expr("", inner.value, inner.cost * factor), rest
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed {head!r} expression: {exc}") from exc
    raise FormatError(f"unknown expression head {head!r}")


def parse_expr(text: str) -> Expr:
    expr, rest = _parse(text.split())
    if rest:
        raise FormatError(f"trailing tokens {rest!r} in {text!r}")
    return Expr(text.strip(), expr.value, expr.cost)


class StepInterpreter:
    """A finite family ``phi_0, ..., phi_{size-1}``; indices past the family diverge everywhere."""

    def __init__(self, sources: Sequence[str]):
        self.exprs = [parse_expr(s) for s in sources]
        self._memo: dict[tuple[int, int], tuple[int | None, int]] = {}

    @property
    def family_size(self) -> int:
        return len(self.exprs)

    @classmethod
    def from_file(cls, path: str | Path) -> StepInterpreter:
        lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
        return cls([ln for ln in lines if ln])

    def to_text(self) -> str:
        return "".join(f"{e.source}\n" for e in self.exprs)

    def run(self, e: int, n: int) -> tuple[int | None, int]:
        """``(value, steps)``; value ``None`` means the computation never halts."""
        key = (e, n)
        hit = self._memo.get(key)
        if hit is None:
            if e >= len(self.exprs):
                hit = (None, 0)
            else:
                expr = self.exprs[e]
                value = expr.value(n)
                hit = (value, (n + 1) * expr.cost)
            self._memo[key] = hit
        return hit

    def eval_bounded(self, e: int, n: int, t: int) -> int | None:
        """``phi_e(n)`` if it halts within ``t`` steps, else ``None``."""
        value, steps = self.run(e, n)
        if value is None or steps > t:
            return None
        return value

    def value(self, e: int, n: int) -> int | None:
        """``phi_e(n)`` with no step bound."""
        return self.run(e, n)[0]

    def total_increasing_upto(self, e: int, n_max: int) -> bool:
        """Whether ``phi_e`` is defined and strictly increasing on ``0..n_max``."""
        prev = None
        for n in range(n_max + 1):
            v = self.value(e, n)
            if v is None or (prev is not None and v <= prev):
                return False
            prev = v
        return True


DEFAULT_FAMILY = (
    "affine 1 0",
    "affine 2 1",
    "slow 3 affine 5 3",
    "poly 0 8 1 / 8",
    "patch 0=1,1=2,2=4 affine 3 2",
    "diverge",
    "partial 10 affine 1 0",
    "patch 5=0 affine 1 0",
)
