from __future__ import annotations

import random

import pytest

from regain.errors import FormatError, PreconditionError
from regain.harness import CONSTRUCTIONS, OracleSuite, Trace, run_experiment, verify_trace
from regain.harness.experiments import normalize_config, oracle_compare, random_instance
from regain.harness.oracles import SIZE_LIMITS

FOUR = "00 1\n01 11\n10 0\n110 111\n"


@pytest.mark.parametrize(
    "config",
    [
        {"construction": "split", "seed": 1, "horizon": 2000},
        {"construction": "split", "seed": 2, "horizon": 2000, "params": {"kind": "ce"}},
        {"construction": "split", "seed": 3, "horizon": 2000, "params": {"kind": "delta", "bound": 3}},
        {"construction": "degree", "seed": 4, "horizon": 500},
        {"construction": "diag", "seed": 0, "horizon": 3000, "params": {"n_max": 60}},
        {"construction": "omega", "seed": 5, "horizon": 256},
        {"construction": "gadget", "seed": 6, "horizon": 400},
    ],
)
def test_fresh_traces_pass_and_replay(config):
    trace = run_experiment(config)
    assert trace.passed, [r.to_line() for r in trace.failures()]
    again = run_experiment(config)
    assert trace.to_text() == again.to_text()
    parsed = Trace.parse(trace.to_text())
    assert parsed.to_text() == trace.to_text()
    assert Trace.from_bytes(trace.to_bytes()).to_text() == trace.to_text()
    report = verify_trace(parsed)
    assert report.passed, [r.to_line() for r in report.report]


def test_omega_four_entry_machine_run(tmp_path):
    path = tmp_path / "four.txt"
    path.write_text(FOUR)
    trace = run_experiment({"construction": "omega", "seed": 0, "horizon": 512, "params": {"machine": str(path)}})
    assert trace.passed
    claims = {r.claim for r in trace.report}
    assert {"matches oracle", "tail bound", "a equals its defining sum", "drop stages = [5]"} <= claims
    # ell changes at stages 4 and 5; the last of them is the drop stage
    assert [rec.stage for rec in trace.stages] == [4, 5]


def test_gadget_recovers_the_set():
    trace = run_experiment({"construction": "gadget", "seed": 11, "horizon": 600})
    assert any(r.claim == "recovered set equals C" and r.ok for r in trace.report)


def test_mutated_code_fails_with_claim_named():
    trace = run_experiment({"construction": "split", "seed": 1, "horizon": 1000})
    lines = trace.to_text().splitlines()
    i = next(i for i, line in enumerate(lines) if line.startswith("S ") and " h=" in line)
    head, value = lines[i].rsplit(" h=", 1)
    code, rest = (value.split(" ", 1) + [""])[:2]
    lines[i] = f"{head} h={int(code) + 1} {rest}".rstrip()
    report = verify_trace(Trace.parse("\n".join(lines) + "\n"))
    assert not report.passed
    assert "conservation" in {r.claim for r in report.failures()}


def test_missing_file_and_unknown_construction():
    with pytest.raises(FormatError):
        run_experiment({"construction": "degree", "seed": 0, "horizon": 10, "params": {"input": "/no/such/file"}})
    with pytest.raises(PreconditionError):
        run_experiment({"construction": "warp", "seed": 0, "horizon": 10})
    with pytest.raises(PreconditionError):
        run_experiment({"construction": "split", "seed": -1.5, "horizon": 10})


def test_input_files_are_pinned(tmp_path):
    path = tmp_path / "f.enum"
    path.write_text("ENUM v1 3\n2\n0\n1\n")
    trace = run_experiment({"construction": "split", "seed": 0, "horizon": 3, "params": {"input": str(path)}})
    assert "input_sha256" in trace.config
    path.write_text("ENUM v1 3\n2\n0\n2\n")
    with pytest.raises(FormatError):
        normalize_config(trace.config)
    assert not verify_trace(trace).passed


@pytest.mark.parametrize(
    "text",
    [
        "",
        "TRACE v2 x\nCONFIG {}\nEND records=0\n",
        "TRACE v1 run_id=0 construction=split seed=0 horizon=1\nCONFIG {}\nEND records=0\n",
    ],
)
def test_schema_mismatch(text):
    with pytest.raises(FormatError):
        Trace.parse(text)


def test_record_count_checked():
    text = run_experiment({"construction": "split", "seed": 1, "horizon": 500}).to_text()
    dropped = [line for line in text.splitlines() if not line.startswith("S ")]
    with pytest.raises(FormatError):
        Trace.parse("\n".join(dropped[:2] + ["S 0 in=1 g=1 jump=1+1"] + dropped[2:]) + "\n")


def test_binary_corruption():
    with pytest.raises(FormatError):
        Trace.from_bytes(b"REGAIN-TRACE-Z1\nnot zlib")


@pytest.mark.parametrize("construction", ["enum_prefix", "split_stream", "degree", "omega", "witness"])
def test_oracle_compare(construction):
    rng = random.Random(42)
    horizon = 120 if construction in ("degree", "omega") else 200
    for _ in range(5):
        assert oracle_compare(random_instance(construction, rng, horizon), construction)["equal"]


def test_oracle_size_limits():
    with pytest.raises(PreconditionError):
        oracle_compare({"codes": [1], "horizon": SIZE_LIMITS["horizon"] + 1}, "split_stream")
    with pytest.raises(PreconditionError):
        oracle_compare({"codes": [1], "horizon": 1}, "nothing")


def test_oracle_suite_registry():
    suite = OracleSuite()
    assert suite.names() == ["degree", "enum_prefix", "omega", "split_stream", "witness"]
    with pytest.raises(KeyError):
        suite["nothing"]
    assert set(CONSTRUCTIONS) == {"split", "degree", "diag", "omega", "gadget"}
