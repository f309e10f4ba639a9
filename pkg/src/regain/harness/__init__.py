"""Experiment harness: traces, reference oracles, the experiment registry and the CLI."""

from __future__ import annotations

from .experiments import CONSTRUCTIONS, run_experiment, verify_trace
from .oracles import OracleSuite
from .trace import Trace

__all__ = ["CONSTRUCTIONS", "run_experiment", "verify_trace", "OracleSuite", "Trace"]
