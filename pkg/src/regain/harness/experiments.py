"""Registered constructions, run as deterministic experiments that produce traces.

A config is a JSON-able dict::

    {"construction": "split", "seed": 7, "horizon": 10000, "params": {"kind": "stream"}}

Input files named in ``params`` (``input``, ``machine``, ``family``) are
hashed into the config, so a trace pins the exact bytes it was run on.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from pathlib import Path
from typing import Callable

from ..constructions import (
    DEFAULT_FAMILY,
    DegreeBuild,
    decode_A_from_stage_limits,
    decode_B_from_stage_limits,
    degree_claim_failures,
    degree_preserving_build,
    diagonalize_non_regaining,
    omega_claim_failures,
    omega_weighting,
    recover_S_from_A,
    recover_S_from_B,
    requirement_checks,
)
from ..enumerations import EnumerationStream, enum_prefix, intersection_gadget, without_repetitions
from ..errors import FormatError, HorizonExhausted, PreconditionError, RegainError
from ..formats import load_delta, load_enum, read_text
from ..foundation import Dyadic
from ..interpreters import StepInterpreter
from ..machines import PrefixMachine, sample_machine
from ..splitting import (
    catchup_failures,
    conservation_failures,
    regular_split_failures,
    split_ce_set,
    split_regular,
    split_stream,
)
from ..synthetic import random_delta_name, random_finite_stream, shuffled_injective
from ..approximations import ApproxSeq, witnesses
from .oracles import (
    SIZE_LIMITS,
    degree_oracle,
    enum_prefix_oracle,
    frac,
    omega_oracle,
    split_oracle,
    witness_oracle,
)
from .trace import Trace

__all__ = [
    "CONSTRUCTIONS",
    "run_experiment",
    "verify_trace",
    "normalize_config",
    "degree_decode_failures",
    "omega_oracle_failures",
    "split_oracle_failures",
    "degree_oracle_failures",
    "oracle_compare",
    "random_instance",
]

FILE_KEYS = ("input", "machine", "family")


def _sha256(path: str) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from exc


def normalize_config(config: dict) -> dict:
    """Fill defaults, validate types and pin input files by content hash."""
    if not isinstance(config, dict):
        raise PreconditionError("config must be a mapping")
    name = config.get("construction")
    if name not in CONSTRUCTIONS:
        raise PreconditionError(f"unknown construction {name!r}; registered: {sorted(CONSTRUCTIONS)}")
    seed, horizon = config.get("seed", 0), config.get("horizon")
    if not isinstance(seed, int) or not isinstance(horizon, int) or horizon < 0:
        raise PreconditionError("seed and horizon must be natural numbers")
    params = dict(config.get("params") or {})
    hashes = {}
    for key in FILE_KEYS:
        if params.get(key) is not None:
            digest = _sha256(params[key])
            pinned = (config.get("input_sha256") or {}).get(key)
            if pinned is not None and pinned != digest:
                raise FormatError(f"{params[key]} changed since the trace was recorded")
            hashes[key] = digest
    out = {"construction": name, "seed": seed, "horizon": horizon, "params": params}
    if hashes:
        out["input_sha256"] = hashes
    return out


# --------------------------------------------------------------------------
# scans shared by experiments, the CLI and the acceptance suite


def degree_decode_failures(f: EnumerationStream, build: DegreeBuild, n_max: int = 100, guard: int = 2) -> list[tuple[str, str]]:
    """Decoding and recovery from certified row limits against brute-force horizon scans."""
    failures: list[tuple[str, str]] = []
    S = build.stabilized(guard)
    A = set(build.f_values)
    B = set(build.g_values)
    prefix: list[int] = []
    while len(prefix) in S:
        prefix.append(S[len(prefix)])
    g = build.g
    for n in range(n_max + 1):
        if n + 1 in S and decode_A_from_stage_limits(f, S, n) != (n in A):
            failures.append(("decode A", f"n = {n}"))
        if any(s > n for s in S.values()) and decode_B_from_stage_limits(g, S, n) != (n in B):
            failures.append(("decode B", f"n = {n}"))
    for i, s in S.items():
        try:
            if recover_S_from_A(f, build.table, i) != s:
                failures.append(("recover S from A", f"i = {i}"))
        except HorizonExhausted:
            pass
    for i in range(len(prefix) - 1):
        try:
            if recover_S_from_B(g, f, build.table, prefix[: i + 1]) != prefix[i + 1]:
                failures.append(("recover S from B", f"i = {i}"))
        except HorizonExhausted:
            pass
    return failures


def split_oracle_failures(codes: list[int], horizon: int) -> list[str]:
    result = split_stream(codes, horizon)
    g, h, rows = split_oracle(codes, horizon)
    bad = []
    if result.g_codes() != g or result.h_codes() != h:
        bad.append("routing differs from the dense oracle")
    if [result.table.current(i) for i in range(len(rows))] != rows:
        bad.append("final rows differ from the dense oracle")
    return bad


def degree_oracle_failures(build: DegreeBuild, guard: int = 2) -> list[str]:
    oracle = degree_oracle(build.f_values, build.horizon)
    bad = []
    if oracle.g != build.g_values:
        bad.append("g differs from the oracle")
    for i, s in build.stabilized(guard).items():
        if oracle.value(i, build.horizon) != s:
            bad.append(f"S_{i} differs from the oracle")
    return bad


def omega_oracle_failures(machine: PrefixMachine, state) -> list[str]:
    oracle = omega_oracle(machine, state.horizon)
    bad = []
    for t in range(state.horizon):
        if oracle.ell[t][: t + 1] != state.ell[t]:
            bad.append(f"ell differs at stage {t}")
        if [oracle.r[t][n] for n in range(t + 2)] != [state.r(n, t) for n in range(t + 2)]:
            bad.append(f"r differs at stage {t}")
        if [oracle.w[t][n] for n in range(t + 2)] != [state.w(n, t) for n in range(t + 2)]:
            bad.append(f"w differs at stage {t}")
        if oracle.a[t] != frac(state.a[t]):
            bad.append(f"a differs at stage {t}")
        if bad:
            break
    return bad


def oracle_compare(instance: dict, construction: str) -> dict:
    """Run the optimized implementation and its oracle on one small instance.

    ``instance`` keys by construction: ``enum_prefix`` {codes, t};
    ``split_stream`` {codes, horizon}; ``degree`` {values, horizon};
    ``omega`` {machine, horizon}; ``witness`` {values, limit}.
    """
    if construction == "enum_prefix":
        codes, t = instance["codes"], instance["t"]
        if len(codes) > SIZE_LIMITS["horizon"]:
            raise PreconditionError("instance exceeds oracle limits")
        bad = [] if set(enum_prefix(EnumerationStream.from_table(codes), t)) == enum_prefix_oracle(codes, t) else ["sets differ"]
    elif construction == "split_stream":
        bad = split_oracle_failures(list(instance["codes"]), instance["horizon"])
    elif construction == "degree":
        values = list(instance["values"])
        build = degree_preserving_build(EnumerationStream.from_table(v + 1 for v in values), instance["horizon"])
        bad = degree_oracle_failures(build)
    elif construction == "omega":
        machine = instance["machine"]
        _, state = omega_weighting(machine, instance["horizon"])
        bad = omega_oracle_failures(machine, state)
    elif construction == "witness":
        values = [Dyadic.coerce(v) for v in instance["values"]]
        if len(values) > SIZE_LIMITS["horizon"]:
            raise PreconditionError("instance exceeds oracle limits")
        limit = Dyadic.coerce(instance["limit"])
        found = witnesses(ApproxSeq.from_values(values), limit, len(values)).witnesses
        bad = [] if found == witness_oracle(values, limit) else ["witness lists differ"]
    else:
        raise PreconditionError(f"no oracle for {construction!r}")
    return {"construction": construction, "equal": not bad, "detail": bad}


def random_instance(construction: str, rng: random.Random, horizon: int) -> dict:
    """A seeded instance of the shape :func:`oracle_compare` expects."""
    if construction == "enum_prefix":
        codes = random_finite_stream(rng)
        return {"codes": codes, "t": rng.randint(0, len(codes) + 5)}
    if construction == "split_stream":
        return {"codes": random_finite_stream(rng), "horizon": horizon}
    if construction == "degree":
        stream = shuffled_injective(rng.getrandbits(32), rng.choice([0.5, 0.25, 0.125, 0.0625]))
        return {"values": [c - 1 for c in stream[:horizon]], "horizon": horizon}
    if construction == "omega":
        return {"machine": sample_machine(rng, rng.randint(4, 16)), "horizon": horizon}
    if construction == "witness":
        limit = Dyadic(rng.getrandbits(20), 20)
        values, cur = [], Dyadic(0)
        for n in range(horizon):
            cur = cur + (limit - cur) * Dyadic(rng.randint(0, 4), 2)
            values.append(cur)
        return {"values": values, "limit": limit}
    raise PreconditionError(f"no oracle for {construction!r}")


def _grouped(trace: Trace, names: list[str], failures: list[tuple[str, str]]) -> None:
    by_claim: dict[str, list[str]] = {n: [] for n in names}
    for claim, detail in failures:
        by_claim.setdefault(claim, []).append(detail)
    for claim, details in by_claim.items():
        trace.check(claim, details)


# --------------------------------------------------------------------------
# constructions


def _load_stream(params: dict) -> EnumerationStream | None:
    return load_enum(read_text(params["input"])) if params.get("input") else None


def _run_split(trace: Trace, rng: random.Random, params: dict) -> None:
    H = trace.horizon
    kind = params.get("kind", "stream")
    if kind == "delta":
        if params.get("input"):
            d = load_delta(read_text(params["input"]))
        else:
            d = random_delta_name(rng, int(params.get("bound", 2)))
        bound = d.multiplicity_bound
        codes = d.codes(H)
        g_name, h_name, table = split_regular(d, H)
        g, h = g_name.codes(H), h_name.codes(H)
    elif kind in ("stream", "ce"):
        stream = _load_stream(params)
        if stream is None:
            stream = EnumerationStream.from_table(random_finite_stream(rng, int(params.get("max_value", 64))))
        if kind == "ce":
            result = split_ce_set(stream, H)
            codes = without_repetitions(stream)[:H]
        else:
            codes = stream[:H]
            result = split_stream(codes, H)
        g, h, table = result.g_codes(), result.h_codes(), result.table
    else:
        raise PreconditionError(f"unknown split kind {kind!r}")
    jumps = {e.stage: e for e in table.events}
    for t, c in enumerate(codes):
        if c:
            e = jumps[t]
            side = "g" if g[t] else "h"
            trace.record(t, **{"in": c, side: c, "jump": f"{e.k}+{e.delta}"})
    if params.get("emit_table"):
        trace.table = list(table.to_lines())
    trace.check("conservation", conservation_failures(codes, g, h))
    certified = table.stabilized_rows(H, 2)
    trace.check("catch-up", catchup_failures(_SplitView(g, h, table, H)))
    trace.check("routing matches oracle", split_oracle_failures(codes, H) if _small(H, codes) else [])
    if kind == "delta":
        _grouped(trace, ["partial-sum additivity", "tail bound"], regular_split_failures(codes, g, h, table, bound or 1))
    trace.check(f"certified rows = {len(certified)}", [])


def _small(H: int, codes: list[int]) -> bool:
    return H <= SIZE_LIMITS["horizon"] and max(codes, default=0) <= SIZE_LIMITS["value"]


class _SplitView:
    """Minimal stand-in for a split result over precomputed code lists."""

    def __init__(self, g, h, table, horizon):
        self._g, self._h, self.table, self.horizon = g, h, table, horizon

    def g_codes(self):
        return self._g

    def h_codes(self):
        return self._h


DEGREE_CLAIMS = [
    "columns increasing",
    "rows nondecreasing",
    "row constant from S_i",
    "f beyond S_i",
    "g beyond S_i",
    "g injective",
    "id-good at S_i",
]


def _run_degree(trace: Trace, rng: random.Random, params: dict) -> None:
    H = trace.horizon
    f = _load_stream(params)
    if f is None:
        f = shuffled_injective(trace.seed, float(params.get("density", 0.25)), int(params.get("window", 8)))
    build = degree_preserving_build(f, H)
    for e in build.table.events:
        trace.record(e.stage, f=build.f_values[e.stage], g=build.g_values[e.stage], jump=f"{e.k}+{e.delta}")
    if params.get("emit_table"):
        trace.table = list(build.table.to_lines())
    _grouped(trace, DEGREE_CLAIMS, degree_claim_failures(build))
    _grouped(
        trace,
        ["decode A", "decode B", "recover S from A", "recover S from B"],
        degree_decode_failures(f, build, int(params.get("n_max", 100))),
    )
    if params.get("oracle", H <= 2000):
        trace.check("matches oracle", degree_oracle_failures(build))
    trace.check(f"certified rows = {len(build.stabilized())}", [])


def _run_diag(trace: Trace, rng: random.Random, params: dict) -> None:
    H = trace.horizon
    interp = StepInterpreter.from_file(params["family"]) if params.get("family") else StepInterpreter(DEFAULT_FAMILY)
    stream = diagonalize_non_regaining(interp, H)
    codes = stream[:H]
    for t, c in enumerate(codes):
        if c:
            trace.record(t, emit=c)
    emitted = [c for c in codes if c]
    trace.check("without repetitions", [c - 1 for c, k in Counter(emitted).items() if k > 1])
    checks = requirement_checks(stream, interp, H, int(params.get("n_max", 200)))
    trace.check("R_e non-inclusion", [f"e={c.e} n={c.n}" for c in checks if not c.holds])
    trace.check(f"requirement instances = {len(checks)}", [])


OMEGA_CLAIMS = [
    "r increasing in n",
    "r nondecreasing in t",
    "w nondecreasing in n, infinite from n = t",
    "w nonincreasing in t",
    "a below 1",
    "a nondecreasing",
    "a equals its defining sum",
    "tail bound",
    "weights below s_m are final",
    "weights from s_m on are at least s_m",
]


def _run_omega(trace: Trace, rng: random.Random, params: dict) -> None:
    H = trace.horizon
    if params.get("machine"):
        try:
            machine = PrefixMachine.parse(read_text(params["machine"]))
        except PreconditionError as exc:
            raise FormatError(str(exc)) from exc
    else:
        machine = sample_machine(rng, int(params.get("size") or rng.randint(4, 16)))
    seq, state = omega_weighting(machine, H)
    for t in range(1, H):
        if state.i_t[t] is not None:
            trace.record(t, i=state.i_t[t], a=state.a[t])
    _grouped(trace, OMEGA_CLAIMS, omega_claim_failures(machine, state))
    if params.get("oracle", H <= 1024 and len(machine) <= SIZE_LIMITS["machine"]):
        trace.check("matches oracle", omega_oracle_failures(machine, state))
    trace.check(f"drop stages = {state.drop_stages}", [])


def _run_gadget(trace: Trace, rng: random.Random, params: dict) -> None:
    """Split ``C`` into disjoint halves, build the two-set gadget over them, and recover ``C``."""
    H = trace.horizon
    stream = _load_stream(params)
    if stream is None:
        stream = EnumerationStream.from_table(random_finite_stream(rng, int(params.get("max_value", 64))))
    C = {c - 1 for c in stream[:H] if c}
    result = split_ce_set(stream, H)
    g, h = result.g_codes(), result.h_codes()
    for t in range(H):
        if g[t] or h[t]:
            trace.record(t, **({"a": g[t]} if g[t] else {"b": h[t]}))
    gad = intersection_gadget(EnumerationStream.from_table(g), EnumerationStream.from_table(h))
    top = max(C, default=0)
    # odd/even members of the decidable halves appear by stage ~4n; leave slack for both inputs
    budget = 8 * (H + 2 * top + 4)
    recovered = set(enum_prefix(gad.recovered, budget))
    trace.check("halves disjoint", sorted({c for c in g if c} & {c for c in h if c}))
    trace.check("recovered set equals C", sorted(recovered ^ C))


CONSTRUCTIONS: dict[str, Callable[[Trace, random.Random, dict], None]] = {
    "split": _run_split,
    "degree": _run_degree,
    "diag": _run_diag,
    "omega": _run_omega,
    "gadget": _run_gadget,
}


def run_experiment(config: dict) -> Trace:
    """Run one registered construction and return its trace, invariant report included."""
    cfg = normalize_config(config)
    trace = Trace(cfg["construction"], cfg["seed"], cfg["horizon"], cfg)
    rng = random.Random(cfg["seed"])
    CONSTRUCTIONS[cfg["construction"]](trace, rng, cfg["params"])
    return trace


# --------------------------------------------------------------------------
# verification


def _scan_records(trace: Trace) -> list[tuple[str, list[str]]]:
    """Claims checkable from the stage records alone, without re-running anything."""
    out: list[tuple[str, list[str]]] = []
    if trace.construction == "split":
        bad = []
        for rec in trace.stages:
            c, g, h = rec.get("in"), rec.get("g"), rec.get("h")
            if c is None or (g is None) == (h is None) or (g or h) != c:
                bad.append(f"stage {rec.stage}")
        out.append(("conservation", bad))
    elif trace.construction == "diag":
        seen = Counter(rec.get("emit") for rec in trace.stages)
        out.append(("without repetitions", [c for c, k in seen.items() if k > 1]))
    elif trace.construction == "degree":
        gs = Counter(rec.get("g") for rec in trace.stages)
        out.append(("g injective", [g for g, k in gs.items() if k > 1]))
    elif trace.construction == "omega":
        bad = []
        prev = Dyadic(0)
        for rec in trace.stages:
            try:
                a = Dyadic.parse(rec.get("a", ""))
            except ValueError:
                bad.append(f"stage {rec.stage}: unreadable a")
                continue
            if a < prev or a >= 1:
                bad.append(f"stage {rec.stage}")
            prev = a
        out.append(("a nondecreasing and below 1", bad))
    elif trace.construction == "gadget":
        a = {rec.get("a") for rec in trace.stages} - {None}
        b = {rec.get("b") for rec in trace.stages} - {None}
        out.append(("halves disjoint", sorted(a & b)))
    for rec in trace.stages:
        if not 0 <= rec.stage < max(trace.horizon, 1):
            out.append(("stages within horizon", [f"stage {rec.stage}"]))
            break
    return out


def verify_trace(trace: Trace) -> Trace:
    """Re-check a trace: record-level scans, its own report, and a byte-for-byte replay.

    Returns a report trace-like object whose ``report`` lists every check;
    ``passed`` is false when any failed.
    """
    report = Trace(trace.construction, trace.seed, trace.horizon, trace.config)
    for claim, bad in _scan_records(trace):
        report.check(claim, bad)
    for line in trace.report:
        if not line.ok:
            report.report.append(line)
    try:
        replay = run_experiment(trace.config)
    except RegainError as exc:
        report.check("replay", [str(exc)])
        return report
    original, again = trace.to_text(), replay.to_text()
    if original != again:
        a, b = original.splitlines(), again.splitlines()
        first = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
        report.check("replay reproduces the trace", [f"line {first + 1} differs"])
        for line in replay.report:
            if not line.ok:
                report.report.append(line)
    else:
        report.check("replay reproduces the trace", [])
    return report
