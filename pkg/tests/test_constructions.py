from __future__ import annotations

import random

import pytest

from regain.constructions import (
    DEFAULT_FAMILY,
    PrefixMachine,
    StepInterpreter,
    decode_A_from_stage_limits,
    decode_B_from_stage_limits,
    degree_claim_failures,
    degree_preserving_build,
    diagonalize_non_regaining,
    ktrivial_coverage,
    ktrivial_witness_machine,
    omega_claim_failures,
    omega_weighting,
    recover_S_from_A,
    recover_S_from_B,
    requirement_checks,
)
from regain.approximations import ApproxSeq, bracket_strings
from regain.enumerations import EnumerationStream, enum_prefix
from regain.errors import HorizonExhausted, PreconditionError
from regain.foundation import Dyadic, unpair
from regain.harness.experiments import degree_decode_failures, degree_oracle_failures, omega_oracle_failures
from regain.harness.oracles import degree_oracle, frac, omega_oracle
from regain.synthetic import shuffled_injective

FOUR = PrefixMachine.build([("00", "1"), ("01", "11"), ("10", "0"), ("110", "111")])


def codes_of(values):
    values = list(values)
    return EnumerationStream.from_function(lambda t: values[t] + 1 if t < len(values) else t + 1)


# -- diagonalization -----------------------------------------------------


def test_empty_family_emits_nothing():
    assert diagonalize_non_regaining(StepInterpreter([]), 200)[:200] == [0] * 200


def test_diverging_index_is_never_served():
    stream = diagonalize_non_regaining(StepInterpreter(["diverge", "affine 1 0"]), 3000)
    emitted = {c - 1 for c in stream[:3000] if c}
    assert emitted and all(unpair(x)[0] == 1 for x in emitted)


def test_diagonalization_defeats_default_family():
    interp = StepInterpreter(DEFAULT_FAMILY)
    stream = diagonalize_non_regaining(interp, 10**4)
    codes = [c for c in stream[: 10**4] if c]
    assert len(codes) == len(set(codes))
    checks = requirement_checks(stream, interp, 10**4, 200)
    assert checks and all(c.holds for c in checks)
    A = set(enum_prefix(stream, 10**4))
    for c in checks[:50]:
        wanted = {x for x in A if x < c.n}
        assert not wanted <= set(enum_prefix(stream, interp.value(c.e, c.n)))


# -- degree-preserving build ---------------------------------------------


def test_degree_single_stage_by_hand():
    build = degree_preserving_build(codes_of([2, 0, 1]), 1)
    assert build.g_values == [2]
    assert [build.table.value(i, 1) for i in range(6)] == [0, 1, 2, 6, 7, 8]
    oracle = degree_oracle([2], 1)
    assert oracle.g == [2] and [oracle.value(i, 1) for i in range(6)] == [0, 1, 2, 6, 7, 8]


def test_degree_identity_stream():
    build = degree_preserving_build(EnumerationStream.from_function(lambda t: t + 1), 100)
    assert build.g_values == [build.table.value(t, t) for t in range(100)]
    assert all(build.table.value(0, t) == 0 for t in range(101))
    assert degree_claim_failures(build) == []
    assert degree_oracle_failures(build) == []


def test_degree_horizon_zero():
    build = degree_preserving_build(codes_of([]), 0)
    assert build.g_values == [] and build.f_values == []


@pytest.mark.parametrize("codes", [[1, 0, 2], [1, 2, 1]])
def test_degree_rejects_non_functions(codes):
    with pytest.raises(PreconditionError):
        degree_preserving_build(EnumerationStream.from_table(codes + [9] * 5), 3)


@pytest.mark.parametrize("seed", range(4))
def test_degree_claims_and_decoding_on_shuffles(seed):
    f = shuffled_injective(seed, [0.5, 0.25, 0.125, 0.0625][seed])
    build = degree_preserving_build(f, 1000)
    assert degree_claim_failures(build) == []
    assert degree_decode_failures(f, build, 100) == []
    assert degree_oracle_failures(build) == []


def test_decode_examples_and_errors():
    f = codes_of([0, 3, 1, 2])
    build = degree_preserving_build(f, 400)
    S = build.stabilized()
    assert decode_A_from_stage_limits(f, S, 0)
    assert decode_B_from_stage_limits(build.g, S, build.g_values[0])
    with pytest.raises(PreconditionError):
        decode_A_from_stage_limits(f, {}, 0)
    with pytest.raises(PreconditionError):
        decode_B_from_stage_limits(build.g, {0: 0}, 5)
    assert recover_S_from_A(f, build.table, 0) == 0
    assert recover_S_from_B(build.g, f, build.table, []) == 0


def test_recover_reports_horizon_exhaustion():
    f = codes_of([5, 0, 1])
    build = degree_preserving_build(f, 2)
    with pytest.raises(HorizonExhausted):
        recover_S_from_A(f, build.table, 3, A={0, 1, 2})


# -- weighted partial sums ---------------------------------------------


def test_omega_starts_at_zero_and_empty_machine_stays_zero():
    seq, state = omega_weighting(FOUR, 1)
    assert seq[0] == Dyadic(0)
    seq, state = omega_weighting(PrefixMachine.build([]), 64)
    assert set(state.a) == {Dyadic(0)}


def test_four_entry_machine_against_oracle():
    seq, state = omega_weighting(FOUR, 512)
    assert omega_claim_failures(FOUR, state) == []
    assert omega_oracle_failures(FOUR, state) == []
    oracle = omega_oracle(FOUR, 512)
    assert [frac(a) for a in state.a] == oracle.a
    # frozen from the oracle run
    assert state.drop_stages == [5]
    assert state.a[511] == Dyadic(7, 5)


@pytest.mark.parametrize("seed", range(3))
def test_sampled_machines_against_oracle(seed):
    from regain.machines import sample_machine

    m = sample_machine(random.Random(seed), 6 + seed)
    _, state = omega_weighting(m, 200)
    assert omega_claim_failures(m, state) == []
    assert omega_oracle_failures(m, state) == []


def test_ktrivial_witness_machine_rule():
    base = PrefixMachine.build([("0", "000"), ("10", "01")])
    a = ApproxSeq.from_function(lambda n: Dyadic(1) - Dyadic.pow2(-(n + 1)))
    out = ktrivial_witness_machine(a, base)
    u, v = bracket_strings(a[3], 3)
    assert out.entries == (("00", u), ("01", v))
    limit = Dyadic(15, 4)
    assert ktrivial_coverage(out, base, limit, 3)
