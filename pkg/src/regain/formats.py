"""Plain-text file formats: ``ENUM v1``, ``APPROX v1`` and ``DELTA v1``.

Each format is a one-line header followed by one value per line. Blank lines
and ``#`` comments are ignored on input and never written.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .approximations import MONOTONE, ApproxSeq
from .enumerations import EnumerationStream
from .errors import FormatError
from .foundation import Dyadic
from .splitting import DeltaName
from .synthetic import generator_stream

__all__ = [
    "dump_enum",
    "load_enum",
    "dump_approx",
    "load_approx",
    "dump_delta",
    "load_delta",
    "read_text",
]


def _lines(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _naturals(body: Iterable[str], what: str) -> list[int]:
    values = []
    for tok in body:
        try:
            v = int(tok)
        except ValueError:
            raise FormatError(f"{what}: {tok!r} is not a natural number") from None
        if v < 0:
            raise FormatError(f"{what}: negative value {v}")
        values.append(v)
    return values


def dump_enum(stream: EnumerationStream, length: int | None = None) -> str:
    """Serialize a stream: finite tables in full, generator streams by id, others by an explicit prefix."""
    if length is None and stream.table is not None:
        codes = list(stream.table)
    elif length is None and stream.generator is not None:
        return "ENUM v1 inf\n" + " ".join(map(str, stream.generator)) + "\n"
    elif length is None:
        raise ValueError("stream has neither a table nor a generator id; pass a length")
    else:
        codes = stream[:length]
    return f"ENUM v1 {len(codes)}\n" + "".join(f"{c}\n" for c in codes)


def load_enum(text: str) -> EnumerationStream:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty ENUM file")
    head = lines[0].split()
    if len(head) != 3 or head[:2] != ["ENUM", "v1"]:
        raise FormatError(f"bad ENUM header {lines[0]!r}")
    if head[2] == "inf":
        if len(lines) != 2:
            raise FormatError("ENUM v1 inf needs exactly one generator line")
        name, *params = lines[1].split()
        return generator_stream(name, *params)
    length = _naturals([head[2]], "ENUM length")[0]
    codes = _naturals(lines[1:], "ENUM body")
    if len(codes) != length:
        raise FormatError(f"ENUM header says {length} codes, body has {len(codes)}")
    return EnumerationStream.from_table(codes)


def dump_approx(seq: ApproxSeq, length: int | None = None) -> str:
    if length is None:
        if seq.table is None:
            raise ValueError("sequence has no finite table; pass a length")
        values = list(seq.table)
    else:
        values = seq[:length]
    return f"APPROX v1 {len(values)} {seq.monotone}\n" + "".join(f"{v}\n" for v in values)


def load_approx(text: str) -> ApproxSeq:
    """Load a finite sequence; past its end the last value repeats."""
    lines = _lines(text)
    if not lines:
        raise FormatError("empty APPROX file")
    head = lines[0].split()
    if len(head) != 4 or head[:2] != ["APPROX", "v1"] or head[3] not in MONOTONE:
        raise FormatError(f"bad APPROX header {lines[0]!r}")
    length = _naturals([head[2]], "APPROX length")[0]
    try:
        values = [Dyadic.parse(v) for v in lines[1:]]
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    if len(values) != length:
        raise FormatError(f"APPROX header says {length} values, body has {len(values)}")
    if not values:
        raise FormatError("APPROX file has no values")
    for i in range(1, len(values)):
        if values[i] < values[i - 1] or (head[3] == "increasing" and values[i] == values[i - 1]):
            raise FormatError(f"APPROX value {i} breaks {head[3]}")
    # an eventually constant tail cannot be strictly increasing, so the loaded sequence is nondecreasing
    return ApproxSeq.from_values(values)


def dump_delta(name: DeltaName, length: int | None = None) -> str:
    if length is None:
        if name.stream.table is None:
            raise ValueError("name has no finite table; pass a length")
        codes = list(name.stream.table)
    else:
        codes = name.codes(length)
    bound = "none" if name.multiplicity_bound is None else str(name.multiplicity_bound)
    return f"DELTA v1 {len(codes)} {bound}\n" + "".join(f"{c}\n" for c in codes)


def load_delta(text: str) -> DeltaName:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty DELTA file")
    head = lines[0].split()
    if len(head) != 4 or head[:2] != ["DELTA", "v1"]:
        raise FormatError(f"bad DELTA header {lines[0]!r}")
    length = _naturals([head[2]], "DELTA length")[0]
    bound = None if head[3] == "none" else _naturals([head[3]], "DELTA bound")[0]
    codes = _naturals(lines[1:], "DELTA body")
    if len(codes) != length:
        raise FormatError(f"DELTA header says {length} codes, body has {len(codes)}")
    name = DeltaName.from_codes(codes, bound)
    try:
        name.codes(length)
    except Exception as exc:
        raise FormatError(str(exc)) from exc
    return name
