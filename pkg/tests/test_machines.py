from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from regain.errors import FormatError, PreconditionError
from regain.foundation import Dyadic
from regain.interpreters import DEFAULT_FAMILY, StepInterpreter, parse_expr
from regain.machines import INF, PrefixMachine, k_approx, sample_machine, shortest_programs


@pytest.mark.parametrize(
    "source,inputs,values",
    [
        ("affine 2 1", [0, 1, 5], [1, 3, 11]),
        ("poly 0 8 1 / 8", [0, 1, 8], [0, 1, 16]),
        ("patch 0=7,2=9 affine 1 0", [0, 1, 2, 3], [7, 1, 9, 3]),
        ("partial 2 affine 1 0", [0, 1, 2], [0, 1, None]),
        ("diverge", [0, 4], [None, None]),
    ],
)
def test_expression_values(source, inputs, values):
    expr = parse_expr(source)
    assert [expr.value(n) for n in inputs] == values


@pytest.mark.parametrize("bad", ["", "affine 1", "poly", "slow 0 affine 1 0", "warp 3", "affine 1 0 extra", "poly 1 / 0"])
def test_malformed_expressions(bad):
    with pytest.raises(FormatError):
        parse_expr(bad)


def test_step_budgets():
    interp = StepInterpreter(["affine 1 0", "slow 3 affine 1 0", "diverge"])
    assert interp.run(0, 4) == (4, 5)
    assert interp.eval_bounded(0, 4, 4) is None and interp.eval_bounded(0, 4, 5) == 4
    assert interp.run(1, 4) == (4, 15)
    assert interp.eval_bounded(2, 0, 10**6) is None
    assert interp.value(7, 0) is None  # past the family


@given(st.integers(0, 50), st.integers(0, 400), st.integers(0, 400))
def test_budgets_are_monotone(n, t1, t2):
    interp = StepInterpreter(DEFAULT_FAMILY)
    lo, hi = sorted((t1, t2))
    for e in range(interp.family_size):
        if interp.eval_bounded(e, n, lo) is not None:
            assert interp.eval_bounded(e, n, hi) == interp.eval_bounded(e, n, lo)


def test_default_family_shape():
    interp = StepInterpreter(DEFAULT_FAMILY)
    assert interp.family_size == 8
    totals = [e for e in range(8) if interp.total_increasing_upto(e, 200)]
    diverging = [e for e in range(8) if any(interp.value(e, n) is None for n in range(200))]
    assert len(totals) == 5 and len(diverging) == 2
    assert len(set(range(8)) - set(totals) - set(diverging)) == 1


def test_interpreter_file_roundtrip(tmp_path):
    path = tmp_path / "family.txt"
    path.write_text("# two functions\naffine 1 0\n\nslow 2 affine 3 1  # slow one\n")
    interp = StepInterpreter.from_file(path)
    assert interp.family_size == 2
    assert StepInterpreter(interp.to_text().splitlines()).run(1, 2) == (7, 6)


def test_machine_validation():
    with pytest.raises(PreconditionError):
        PrefixMachine.build([("0", "1"), ("01", "1")])
    with pytest.raises(PreconditionError):
        PrefixMachine.build([("0", "1"), ("0", "0")])
    with pytest.raises(PreconditionError):
        PrefixMachine.build([("0", "1"), ("1", "0")])  # weight 1
    with pytest.raises(PreconditionError):
        PrefixMachine.build([("2", "1")])


def test_machine_text_roundtrip(tmp_path):
    m = PrefixMachine.build([("00", "1"), ("01", "11"), ("10", ""), ("110", "111")])
    assert m.weight == Dyadic(7, 3)
    assert PrefixMachine.parse(m.to_text()) == m
    path = tmp_path / "m.txt"
    path.write_text("# comment\n" + m.to_text())
    assert PrefixMachine.from_file(path) == m
    assert m.h(3) == "110" and m.h(4) is None
    assert m.output("01") == "11" and m.output("111") is None
    with pytest.raises(FormatError):
        PrefixMachine.parse("00 1 extra\n")


def test_k_approx_examples():
    m = PrefixMachine.build([("0", "11"), ("100", "11"), ("101", "0")])
    assert k_approx(m, "11", 0) == INF
    assert k_approx(m, "11", 1) == 1
    assert k_approx(m, "01", 3) == INF
    assert shortest_programs(m, 3) == {"11": 1, "0": 3}


@given(st.integers(0, 10**6), st.integers(4, 16))
def test_sampled_machines_respect_constraints(seed, size):
    m = sample_machine(random.Random(seed), size)
    assert len(m) == size
    assert m.weight <= Dyadic(15, 4)
    for t in range(size + 1):
        for v in {out for _, out in m.entries}:
            assert k_approx(m, v, t) == min((len(u) for u, o in m.entries[:t] if o == v), default=INF)
