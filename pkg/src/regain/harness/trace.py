"""Run traces: one record per line, with an optional zlib-packed binary form.

Text layout::

    TRACE v1 run_id=<id> construction=<name> seed=<seed> horizon=<H>
    CONFIG <canonical JSON>
    S <stage> key=value key=value ...
    T <table line>                    (only with emit_table)
    R <pass|fail> <claim> :: <detail>
    END records=<number of S lines> verdict=<pass|fail>

Values never contain spaces; dyadics use their canonical text form.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import FormatError

__all__ = ["Trace", "StageRecord", "ReportLine", "canonical_config", "run_id_for", "BINARY_MAGIC"]

BINARY_MAGIC = b"REGAIN-TRACE-Z1\n"


def canonical_config(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def run_id_for(config: dict) -> str:
    return hashlib.sha256(canonical_config(config).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class StageRecord:
    stage: int
    fields: tuple[tuple[str, str], ...]

    def get(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.fields:
            if k == key:
                return v
        return default

    def to_line(self) -> str:
        return " ".join([f"S {self.stage}"] + [f"{k}={v}" for k, v in self.fields])

    @classmethod
    def parse(cls, line: str) -> StageRecord:
        parts = line.split()
        try:
            stage = int(parts[1])
            fields = tuple(tuple(p.split("=", 1)) for p in parts[2:])
        except (IndexError, ValueError) as exc:
            raise FormatError(f"bad stage record {line!r}") from exc
        if any(len(f) != 2 for f in fields):
            raise FormatError(f"bad stage record {line!r}")
        return cls(stage, fields)  # type: ignore[arg-type]


@dataclass(frozen=True)
class ReportLine:
    claim: str
    ok: bool
    detail: str = ""

    def to_line(self) -> str:
        return f"R {'pass' if self.ok else 'fail'} {self.claim} :: {self.detail}"

    @classmethod
    def parse(cls, line: str) -> ReportLine:
        body = line[2:]
        verdict, _, rest = body.partition(" ")
        claim, sep, detail = rest.partition(" :: ")
        if verdict not in ("pass", "fail") or not sep:
            raise FormatError(f"bad report line {line!r}")
        return cls(claim, verdict == "pass", detail)


@dataclass
class Trace:
    construction: str
    seed: int
    horizon: int
    config: dict
    stages: list[StageRecord] = field(default_factory=list)
    report: list[ReportLine] = field(default_factory=list)
    table: list[str] = field(default_factory=list)

    @property
    def run_id(self) -> str:
        return run_id_for(self.config)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.report)

    def failures(self) -> list[ReportLine]:
        return [r for r in self.report if not r.ok]

    def record(self, stage: int, **fields) -> None:
        self.stages.append(StageRecord(stage, tuple((k, str(v)) for k, v in fields.items())))

    def check(self, claim: str, failures) -> None:
        """Append one report line per claim: pass, or fail with the first failure."""
        failures = list(failures)
        if failures:
            self.report.append(ReportLine(claim, False, f"{len(failures)} failure(s); first: {failures[0]}"))
        else:
            self.report.append(ReportLine(claim, True, ""))

    # -- serialization -------------------------------------------------

    def to_text(self) -> str:
        lines = [
            f"TRACE v1 run_id={self.run_id} construction={self.construction} seed={self.seed} horizon={self.horizon}",
            f"CONFIG {canonical_config(self.config)}",
        ]
        lines += [s.to_line() for s in self.stages]
        lines += [f"T {t}" for t in self.table]
        lines += [r.to_line() for r in self.report]
        lines.append(f"END records={len(self.stages)} verdict={'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"

    def to_bytes(self) -> bytes:
        return BINARY_MAGIC + zlib.compress(self.to_text().encode(), 9)

    @classmethod
    def from_bytes(cls, data: bytes) -> Trace:
        if data.startswith(BINARY_MAGIC):
            try:
                data = zlib.decompress(data[len(BINARY_MAGIC) :])
            except zlib.error as exc:
                raise FormatError(f"corrupt binary trace: {exc}") from exc
        try:
            text = data.decode()
        except UnicodeDecodeError as exc:
            raise FormatError("trace is neither text nor a binary trace") from exc
        return cls.parse(text)

    def save(self, path: str | Path, fmt: str = "text") -> None:
        if fmt == "binary":
            Path(path).write_bytes(self.to_bytes())
        elif fmt == "text":
            Path(path).write_text(self.to_text())
        else:
            raise ValueError(f"unknown trace format {fmt!r}")

    @classmethod
    def load(cls, path: str | Path) -> Trace:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
        return cls.from_bytes(data)

    @classmethod
    def parse(cls, text: str) -> Trace:
        lines = text.splitlines()
        if len(lines) < 3:
            raise FormatError("trace too short")
        head = lines[0].split()
        if head[:2] != ["TRACE", "v1"]:
            raise FormatError(f"bad trace header {lines[0]!r}")
        try:
            meta = dict(p.split("=", 1) for p in head[2:])
            seed, horizon = int(meta["seed"]), int(meta["horizon"])
            construction, run_id = meta["construction"], meta["run_id"]
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad trace header {lines[0]!r}") from exc
        if not lines[1].startswith("CONFIG "):
            raise FormatError("second line must be CONFIG")
        try:
            config = json.loads(lines[1][len("CONFIG ") :])
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad CONFIG json: {exc}") from exc
        if not isinstance(config, dict):
            raise FormatError("CONFIG must be a JSON object")
        trace = cls(construction, seed, horizon, config)
        if trace.run_id != run_id:
            raise FormatError(f"run_id {run_id} does not match CONFIG (expected {trace.run_id})")
        if config.get("construction") != construction or config.get("seed") != seed or config.get("horizon") != horizon:
            raise FormatError("header disagrees with CONFIG")
        end = lines[-1].split()
        if not end or end[0] != "END":
            raise FormatError("missing END line")
        for line in lines[2:-1]:
            tag = line[:2]
            if tag == "S ":
                trace.stages.append(StageRecord.parse(line))
            elif tag == "T ":
                trace.table.append(line[2:])
            elif tag == "R ":
                trace.report.append(ReportLine.parse(line))
            else:
                raise FormatError(f"unknown record {line!r}")
        expected = f"records={len(trace.stages)}"
        if expected not in end:
            raise FormatError(f"END line says {lines[-1]!r} but the trace has {len(trace.stages)} stage records")
        return trace
