"""Stage-by-stage builders: a diagonalizing enumeration, a degree-preserving
re-enumeration, and a weighted partial-sum construction over a toy machine.

Each builder is a single deterministic pass; the ``*_failures`` functions
replay the claims that the correctness argument depends on as direct scans
over the finite run and return what they find instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .approximations import ApproxSeq, bracket_strings
from .enumerations import EnumerationStream
from .errors import HorizonExhausted, InvariantViolation, PreconditionError
from .foundation import Dyadic, FinSet, pair, real_prefix, unpair
from .interpreters import DEFAULT_FAMILY, StepInterpreter
from .machines import INF, PrefixMachine, k_approx, shortest_programs
from .stagetable import StageTable

__all__ = [
    "StepInterpreter",
    "PrefixMachine",
    "StageTable",
    "k_approx",
    "DEFAULT_FAMILY",
    "diagonalize_non_regaining",
    "RequirementCheck",
    "requirement_checks",
    "DegreeBuild",
    "degree_preserving_build",
    "degree_claim_failures",
    "decode_A_from_stage_limits",
    "decode_B_from_stage_limits",
    "recover_S_from_A",
    "recover_S_from_B",
    "OmegaState",
    "omega_weighting",
    "omega_claim_failures",
    "ktrivial_witness_machine",
]


# --------------------------------------------------------------------------
# diagonalization against a step-bounded family


def diagonalize_non_regaining(interp: StepInterpreter, horizon: int) -> EnumerationStream:
    """Enumeration without repetitions defeating every total increasing ``phi_e``.

    At stage ``t`` with ``<e,k> = pi_1(t)`` the element ``<e,k>`` is enumerated
    when ``phi_e`` has converged within ``t`` steps on ``0..<e,k+1>``, is
    increasing there, ``t >= phi_e(<e,k+1>)``, and ``<e,k>`` is still new.
    The first ``horizon`` stages are computed eagerly; later stages on demand.
    """
    size = interp.family_size
    # per index: (first n where phi_e is undefined or fails to increase, or None; last value checked)
    scan: dict[int, list] = {}

    def first_bad(e: int, upto: int) -> int:
        """Least ``n <= upto`` where ``phi_e`` is undefined or not increasing, else ``upto + 1``."""
        state = scan.setdefault(e, [None, -1, None])  # [bad, checked_upto, last_value]
        while state[0] is None and state[1] < upto:
            n = state[1] + 1
            v = interp.value(e, n)
            if v is None or (state[2] is not None and v <= state[2]):
                state[0] = n
            state[1], state[2] = n, v
        if state[0] is not None and state[0] <= upto:
            return state[0]
        return upto + 1

    def run() -> Iterator[int]:
        enumerated: set[int] = set()
        t = 0
        while True:
            x = unpair(t)[0]
            e, k = unpair(x)
            code = 0
            if e < size and x not in enumerated:
                top = pair(e, k + 1)
                value, steps = interp.run(e, top)
                # steps grow with n, so convergence at ``top`` covers every n <= top
                if value is not None and steps <= t and t >= value and first_bad(e, top) > top:
                    enumerated.add(x)
                    code = x + 1
            yield code
            t += 1

    stream = EnumerationStream(run)
    if horizon:
        stream[horizon - 1]
    return stream


@dataclass(frozen=True)
class RequirementCheck:
    """One instance of the requirement for index ``e`` at length ``n``."""

    e: int
    n: int
    holds: bool
    witness: int | None
    proof_witness: int


def requirement_checks(
    stream: EnumerationStream, interp: StepInterpreter, horizon: int, n_max: int
) -> list[RequirementCheck]:
    """``{0..n-1} ∩ A ⊄ Enum(g)[phi_e(n)]`` for each total increasing ``e`` and ``<e,0> < n <= n_max``.

    ``A`` is everything enumerated before ``horizon``. The witness reported is
    the proof's ``<e,k>`` (with ``<e,k> < n <= <e,k+1>``) when it works and
    otherwise the latest-enumerated element below ``n``.
    """
    codes = stream[:horizon]
    first_stage = {c - 1: t for t, c in enumerate(codes) if c}
    # latest[n] = (stage, element) maximizing the enumeration stage among elements below n
    latest: list[tuple[int, int | None]] = [(-1, None)]
    for x in range(n_max + 1):
        best = latest[-1]
        s = first_stage.get(x)
        if s is not None and s > best[0]:
            best = (s, x)
        latest.append(best)
    checks = []
    for e in range(interp.family_size):
        if not interp.total_increasing_upto(e, n_max):
            continue
        for n in range(pair(e, 0) + 1, n_max + 1):
            k = 0
            while pair(e, k + 1) < n:
                k += 1
            proof = pair(e, k)
            bound = interp.value(e, n)
            stage, elem = latest[n]
            holds = stage >= bound
            if holds and first_stage.get(proof, -1) >= bound:
                elem = proof
            checks.append(RequirementCheck(e, n, holds, elem if holds else None, proof))
    return checks


# --------------------------------------------------------------------------
# degree-preserving re-enumeration


@dataclass
class DegreeBuild:
    """Output of :func:`degree_preserving_build`; unpacks as ``(g, table)``."""

    g: EnumerationStream
    table: StageTable
    f_values: list[int]
    g_values: list[int]
    horizon: int

    def __iter__(self):
        return iter((self.g, self.table))

    def stabilized(self, guard: int = 2) -> dict[int, int]:
        return self.table.stabilized_rows(self.horizon, guard)


def degree_preserving_build(f: EnumerationStream, horizon: int) -> DegreeBuild:
    """``g(t) = s_{f(t)}[t]``, then ``s_i += max(t, g(0..t)) + 1`` for ``i > f(t)``.

    ``f`` must never emit 0 and must never repeat a code; both are checked
    as the stages run.
    """
    table = StageTable()
    seen: set[int] = set()
    f_values: list[int] = []
    g_values: list[int] = []
    top = 0
    for t in range(horizon):
        c = f[t]
        if c == 0:
            raise PreconditionError(f"f emits the empty code at stage {t}; it must be a function")
        v = c - 1
        if v in seen:
            raise PreconditionError(f"f repeats {v} at stage {t}; it must be injective")
        seen.add(v)
        gt = table.current(v)
        top = max(top, t, gt)
        f_values.append(v)
        g_values.append(gt)
        table.apply(t, v, top + 1)
    table.advance(horizon)
    return DegreeBuild(EnumerationStream.from_table(x + 1 for x in g_values), table, f_values, g_values, horizon)


def degree_claim_failures(build: DegreeBuild, rows: int | None = None, guard: int = 2) -> list[tuple[str, str]]:
    """Direct scans of the construction's claims over the finite run.

    Columns increasing and rows nondecreasing are scanned on a dense copy of
    the first ``rows`` rows (default: two past the last certified row, at
    least 8). Claims about limits use the certified rows.
    """
    failures: list[tuple[str, str]] = []
    certified = build.stabilized(guard)
    if rows is None:
        rows = max(8, max(certified, default=0) + 2)
    dense = build.table.dense(rows, build.horizon)
    try:
        dense.check_claims()
    except InvariantViolation as exc:
        failures.append((exc.claim, exc.detail))
    fv, gv = build.f_values, build.g_values
    for i, s in certified.items():
        if i < rows:
            for t in range(s, build.horizon + 1):
                if dense.columns[t][i] != s:
                    failures.append(("row constant from S_i", f"s_{i}[{t}] != S_{i} = {s}"))
                    break
        for t in range(s, build.horizon):
            if fv[t] < i:
                failures.append(("f beyond S_i", f"f({t}) = {fv[t]} < {i} with S_{i} = {s}"))
                break
        for t in range(s, build.horizon):
            if gv[t] < s:
                failures.append(("g beyond S_i", f"g({t}) = {gv[t]} < S_{i} = {s}"))
                break
    if len(set(gv)) != len(gv):
        failures.append(("g injective", "a value of g repeats"))
    for i, s in certified.items():
        # the shifted output is id-good at every certified S_i
        wanted = {x for x in gv if x < s}
        early = {x for x in gv[:s] if x < s}
        if wanted != early:
            failures.append(("id-good at S_i", f"B below {s} not enumerated before stage {s}"))
    return failures


def _limit(S: Mapping[int, int] | Sequence[int | None], i: int) -> int | None:
    if isinstance(S, Mapping):
        return S.get(i)
    return S[i] if i < len(S) else None


def decode_A_from_stage_limits(f: EnumerationStream, S, n: int) -> bool:
    """``n`` is in ``f``'s range iff it shows up before stage ``S_{n+1}``."""
    bound = _limit(S, n + 1)
    if bound is None:
        raise PreconditionError(f"S_{n + 1} is not stabilized")
    return any(c == n + 1 for c in f[:bound])


def decode_B_from_stage_limits(g: EnumerationStream, S, n: int) -> bool:
    """Take the least available ``S_i > n``; ``n`` is in ``g``'s range iff it shows up before stage ``S_i``."""
    items = S.items() if isinstance(S, Mapping) else enumerate(S)
    candidates = [s for _, s in items if s is not None and s > n]
    if not candidates:
        raise PreconditionError(f"no stabilized S_i above {n}")
    return any(c == n + 1 for c in g[: min(candidates)])


def recover_S_from_A(f: EnumerationStream, table: StageTable, i: int, A: FinSet | None = None) -> int:
    """``s_i[t]`` at the least ``t`` with ``A ∩ {0..i-1} ⊆ {f(0..t-1)}``.

    ``A`` defaults to what ``f`` enumerates within the table's horizon.
    """
    horizon = table.horizon
    codes = f[:horizon]
    if A is None:
        A = FinSet(c - 1 for c in codes if c)
    needed = {x for x in A if x < i}
    t = 0
    while needed:
        if t >= horizon:
            raise HorizonExhausted(f"A ∩ {{0..{i - 1}}} not enumerated within {horizon} stages")
        needed.discard(codes[t] - 1)
        t += 1
    return table.value(i, t)


def recover_S_from_B(
    g: EnumerationStream,
    f: EnumerationStream,
    table: StageTable,
    S_prefix: Sequence[int],
    B: FinSet | None = None,
) -> int:
    """``S_{i+1}`` from ``S_0..S_i`` with membership queries to ``B``.

    If ``S_i ∈ B`` and the unique ``t`` with ``g(t) = S_i`` has ``f(t) = i``
    and ``t >= S_i``, the answer is ``s_{i+1}[t+1]``; otherwise ``s_{i+1}[S_i]``.
    """
    horizon = table.horizon
    gcodes = g[:horizon]
    if B is None:
        B = FinSet(c - 1 for c in gcodes if c)
    i = len(S_prefix) - 1
    if i < 0:
        return 0
    s_i = S_prefix[i]
    if s_i in B:
        stages = [t for t, c in enumerate(gcodes) if c == s_i + 1]
        if not stages:
            raise HorizonExhausted(f"{s_i} is in B but no stage below {horizon} emits it")
        t = stages[0]
        if f[t] - 1 == i and t >= s_i:
            if t + 1 > horizon:
                raise HorizonExhausted(f"stage {t + 1} is past the horizon")
            return table.value(i + 1, t + 1)
    if s_i > horizon:
        raise HorizonExhausted(f"stage {s_i} is past the horizon")
    return table.value(i + 1, s_i)


# --------------------------------------------------------------------------
# weighted partial sums over a toy machine


@dataclass
class OmegaState:
    """Full history of the weighted construction up to its horizon.

    ``ell[t][n]`` for ``n <= t``; ``rr[t][n]`` for ``n <= t`` with
    ``rr(n)[t] = n + rr_tail[t]`` beyond; ``ww[t][n]`` for ``n < t``
    (``INF`` from ``n = t`` on); ``i_t[t]`` is the least changed index or
    ``None``.
    """

    horizon: int
    ell: list[list[int]] = field(default_factory=list)
    rr: list[list[int]] = field(default_factory=list)
    rr_tail: list[int] = field(default_factory=list)
    ww: list[list[float]] = field(default_factory=list)
    a: list[Dyadic] = field(default_factory=list)
    i_t: list[int | None] = field(default_factory=list)

    def r(self, n: int, t: int) -> int:
        row = self.rr[t]
        return row[n] if n < len(row) else n + self.rr_tail[t]

    def w(self, n: int, t: int) -> float:
        row = self.ww[t]
        return row[n] if n < len(row) else INF

    def ell_at(self, n: int, t: int) -> int:
        if t == 0:
            return 0
        return self.ell[t][n]

    @property
    def drop_stages(self) -> list[int]:
        """Distinct positive values of ``s_m``, computed from the stored history."""
        return sorted({s for s in self.s_values() if s > 0})

    def s_values(self) -> list[int]:
        """``s_m`` for ``m = 0 .. horizon``: the last stage where some ``i < m`` (with ``i < s``) changed."""
        out = []
        for m in range(self.horizon + 1):
            best = 0
            for s in range(1, self.horizon):
                i = self.i_t[s]
                if i is not None and i < m:
                    best = s
            out.append(best)
        return out


def _weight_term(w: float, program: str | None) -> Dyadic:
    if program is None or w == INF:
        return Dyadic(0)
    return Dyadic.pow2(-(int(w) + len(program)))


def _scratch_sum(machine: PrefixMachine, state: OmegaState, t: int) -> Dyadic:
    """``Σ_{n<t} 2^-w(n)[t] · 2^-|h(n)|`` recomputed from the stored weights."""
    exps = []
    for n in range(min(t, len(machine.entries))):
        w = state.w(n, t)
        if w != INF:
            exps.append(int(w) + len(machine.entries[n][0]))
    if not exps:
        return Dyadic(0)
    top = max(exps)
    return Dyadic(sum(1 << (top - e) for e in exps), top)


def _prefix_source(a: Dyadic) -> Dyadic:
    """Strings read off a value in ``[0, 1)`` use the expansion of ``y ∈ (0, 1]`` with ``a - y`` an integer."""
    return a if a > 0 else Dyadic(1)


def omega_weighting(machine: PrefixMachine, horizon: int) -> tuple[ApproxSeq, OmegaState]:
    """Run the weighted construction for ``horizon`` stages (``a_0 .. a_{horizon-1}``).

    ``h(n)`` past the finite domain contributes nothing to the sums.
    """
    state = OmegaState(horizon)
    if horizon <= 0:
        return ApproxSeq.from_values([0]), state
    programs = [machine.h(n) for n in range(horizon)]
    maxlen = max((len(v) for _, v in machine.entries), default=0)
    state.ell.append([0])
    state.rr.append([0])
    state.rr_tail.append(0)
    state.ww.append([])
    state.a.append(Dyadic(0))
    state.i_t.append(None)
    best: dict[str, int] = {}
    for t in range(1, horizon):
        if t - 1 < len(machine.entries):
            u, v = machine.entries[t - 1]
            if v not in best or len(u) < best[v]:
                best[v] = len(u)
        bits = real_prefix(_prefix_source(state.a[t - 1]), maxlen) if maxlen else ""
        blocked = {len(v) for v, k in best.items() if k <= len(v) and bits.startswith(v)}
        ell = [0]
        m = 0
        for _ in range(t):
            m += 1
            while m in blocked:
                m += 1
            ell.append(m)
        prev_ell = state.ell[t - 1]
        i_t = next((i for i in range(t) if ell[i] != prev_ell[i]), None)
        tail = state.rr_tail[t - 1]
        r = state.rr[t - 1] + [t + tail]
        w_prev = state.ww[t - 1]
        a_t = state.a[t - 1]
        if i_t is None:
            w = w_prev + [INF]
        else:
            r = r[: i_t + 1] + [x + t for x in r[i_t + 1 :]]
            tail += t
            cap = r[i_t]
            w = [min(x, cap) for x in w_prev] + [cap]
            for n in range(t):
                old = w_prev[n] if n < len(w_prev) else INF
                if w[n] != old:
                    a_t = a_t + _weight_term(w[n], programs[n]) - _weight_term(old, programs[n])
        state.ell.append(ell)
        state.rr.append(r)
        state.rr_tail.append(tail)
        state.ww.append(w)
        state.a.append(a_t)
        state.i_t.append(i_t)
    values = list(state.a)
    return ApproxSeq.from_values(values), state


def omega_claim_failures(machine: PrefixMachine, state: OmegaState) -> list[tuple[str, str]]:
    """Claims on ``r``, ``w`` and ``a`` at every stage, plus the tail bound and limit claims at each drop stage."""
    failures: list[tuple[str, str]] = []
    H = state.horizon
    for t in range(H):
        r = state.rr[t]
        if any(r[n + 1] <= r[n] for n in range(len(r) - 1)):
            failures.append(("r increasing in n", f"stage {t}"))
        if t and any(state.r(n, t) < state.r(n, t - 1) for n in range(t + 1)):
            failures.append(("r nondecreasing in t", f"stage {t}"))
        w = state.ww[t]
        if len(w) != t or any(w[n + 1] < w[n] for n in range(len(w) - 1)):
            failures.append(("w nondecreasing in n, infinite from n = t", f"stage {t}"))
        if t and any(state.w(n, t) > state.w(n, t - 1) for n in range(t)):
            failures.append(("w nonincreasing in t", f"stage {t}"))
        a = state.a[t]
        if a >= 1:
            failures.append(("a below 1", f"a_{t} = {a}"))
        if t and a < state.a[t - 1]:
            failures.append(("a nondecreasing", f"stage {t}"))
        scratch = _scratch_sum(machine, state, t)
        if scratch != a:
            failures.append(("a equals its defining sum", f"stage {t}: {a} != {scratch}"))
    if H == 0:
        return failures
    last = H - 1
    for s in state.drop_stages:
        if not state.a[last] - state.a[s] < Dyadic.pow2(-s):
            failures.append(("tail bound", f"a_{last} - a_{s} >= 2^-{s}"))
        for n in range(min(s, last)):
            if state.w(n, last) != state.w(n, s):
                failures.append(("weights below s_m are final", f"n = {n}, s_m = {s}"))
                break
        for n in range(s, last):
            if state.w(n, last) < s:
                failures.append(("weights from s_m on are at least s_m", f"n = {n}, s_m = {s}"))
                break
    return failures


# --------------------------------------------------------------------------
# bracket-string machine


def ktrivial_witness_machine(a: ApproxSeq, base: PrefixMachine) -> PrefixMachine:
    """For each base program ``w`` printing ``0^n``: ``w0 -> u_n`` and ``w1 -> v_n``.

    ``u_n, v_n`` are the bracket strings of ``a_n``. Base programs printing
    anything else are dropped.
    """
    entries = []
    for w, out in base.entries:
        if out and set(out) == {"0"}:
            n = len(out)
            u, v = bracket_strings(a[n], n)
            entries.append((w + "0", u))
            entries.append((w + "1", v))
    return PrefixMachine.build(entries)


def ktrivial_coverage(machine: PrefixMachine, base: PrefixMachine, limit: Dyadic, n: int) -> bool:
    """Whether some program of length ``K_base(0^n) + 1`` prints the length-``n`` prefix of ``limit``."""
    k = k_approx(base, "0" * n, len(base))
    if k == INF:
        return False
    target = real_prefix(limit, n)
    return any(len(u) == k + 1 and out == target for u, out in machine.entries)
