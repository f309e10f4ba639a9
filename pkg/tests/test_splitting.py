from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from regain.enumerations import EnumerationStream, decidable_to_idgood, enum_prefix, without_repetitions
from regain.errors import InvariantViolation, PreconditionError
from regain.foundation import Dyadic
from regain.harness.oracles import split_oracle
from regain.splitting import (
    DeltaName,
    catchup_failures,
    catchup_stages,
    check_split,
    conservation_failures,
    deltaname_partial_sums,
    partial_sum_numerators,
    regular_split_failures,
    split_ce_set,
    split_regular,
    split_stream,
)
from regain.synthetic import random_delta_name

codes_st = st.lists(st.one_of(st.just(0), st.integers(1, 20)), max_size=120)


def test_hand_simulated_example():
    # stage 0: n=0, k=1 (odd) -> g; rows > 1 jump by 1: s = (0,1,3,4,...)
    # stage 1: n=2, k=2 (even) -> h; rows > 2 jump by 2
    # stage 2: n=1, k=2 (even) -> h; rows > 2 jump by 3
    res = split_stream([1, 3, 2, 0, 0], 5)
    assert res.g_codes() == [1, 0, 0, 0, 0]
    assert res.h_codes() == [0, 3, 2, 0, 0]
    assert [res.table.current(i) for i in range(5)] == [0, 1, 3, 9, 10]
    assert set(enum_prefix(res.g, 5)) == {0} and set(enum_prefix(res.h, 5)) == {1, 2}


def test_all_zero_stream():
    res = split_stream([0] * 20, 20)
    assert res.g_codes() == res.h_codes() == [0] * 20
    assert [res.table.current(i) for i in range(6)] == list(range(6))


def test_repeated_values_are_both_routed():
    res = split_stream([1, 1, 0], 3)
    assert Counter(c for c in res.g_codes() + res.h_codes() if c) == Counter({1: 2})


@given(codes_st)
def test_matches_dense_oracle(codes):
    H = len(codes) + 3
    res = split_stream(codes, H)
    g, h, rows = split_oracle(codes, H)
    assert res.g_codes() == g and res.h_codes() == h
    assert [res.table.current(i) for i in range(len(rows))] == rows


@given(codes_st)
def test_conservation_and_catchup(codes):
    H = 4 * len(codes) + 8
    res = split_stream(codes, H)
    assert conservation_failures(codes, res.g_codes(), res.h_codes()) == []
    assert catchup_failures(res) == []
    check_split(res, codes)


def test_check_split_names_the_broken_claim():
    res = split_stream([1, 3, 2], 3)
    with pytest.raises(InvariantViolation) as err:
        check_split(res, [1, 3, 3])
    assert err.value.claim == "conservation"


def test_catchup_stages_partition_rows_by_parity():
    res = split_stream([1, 3, 2, 5, 4], 200)
    even, odd = catchup_stages(res)
    assert all(i % 2 == 0 for i in even) and all(i % 2 == 1 for i in odd)
    assert set(even) | set(odd) == set(res.table.stabilized_rows(200))


def test_split_ce_set_of_all_naturals():
    fC = decidable_to_idgood(lambda n: True)
    res = split_ce_set(fC, 64)
    A, B = set(enum_prefix(res.g, 64)), set(enum_prefix(res.h, 64))
    assert A | B == set(range(64)) and not A & B
    assert catchup_failures(res) == []


def test_split_ce_set_empty_and_repetitions():
    res = split_ce_set(EnumerationStream.zero(), 10)
    assert res.g_codes() == res.h_codes() == [0] * 10
    rep = EnumerationStream.from_table([2, 2, 1, 3, 1])
    a, b = split_ce_set(rep, 5), split_stream(without_repetitions(rep), 5)
    assert (a.g_codes(), a.h_codes()) == (b.g_codes(), b.h_codes())


@pytest.mark.parametrize(
    "codes,t,value",
    [([0, 0, 0], 3, Dyadic(0)), ([1, 2, 3, 4], 4, Dyadic(15, 4)), ([2, 2, 0], 2, Dyadic(1, 1))],
)
def test_deltaname_partial_sums(codes, t, value):
    assert deltaname_partial_sums(DeltaName.from_codes(codes))[t] == value


@given(st.lists(st.integers(0, 12), max_size=40))
def test_partial_sum_numerators_match_dyadic_sums(codes):
    seq = deltaname_partial_sums(DeltaName.from_codes(codes))
    nums = partial_sum_numerators(codes, 12)
    assert [Dyadic(x, 12) for x in nums] == seq[: len(codes) + 1]


def test_delta_name_bound_enforced():
    with pytest.raises(PreconditionError):
        DeltaName.from_codes([3, 3, 3], 2).codes(3)


def test_split_regular_strongly_left_computable():
    # 2^-A for A = {0,1,2}: summands 2^-1, 2^-2, 2^-3
    d = DeltaName.from_codes([1, 2, 3], 1)
    for H in range(1, 8):
        g, h, table = split_regular(d, H)
        total = deltaname_partial_sums(g)[H] + deltaname_partial_sums(h)[H]
        assert total == (Dyadic(7, 3) if H >= 3 else deltaname_partial_sums(d)[H])
        assert g.multiplicity_bound == h.multiplicity_bound == 1


def test_split_regular_all_zero():
    g, h, _ = split_regular(DeltaName.from_codes([0] * 8, 1), 8)
    assert g.codes(8) == h.codes(8) == [0] * 8


@pytest.mark.parametrize("seed", range(6))
def test_split_regular_duplicates_conserve(seed):
    rng = random.Random(seed)
    d = random_delta_name(rng, 2)
    H = 4000
    g, h, table = split_regular(d, H)
    assert regular_split_failures(d.codes(H), g.codes(H), h.codes(H), table, 2) == []
