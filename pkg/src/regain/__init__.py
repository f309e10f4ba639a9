"""Exact-arithmetic tools for approximations that catch up with their limit infinitely often, and for the sets they describe."""

from __future__ import annotations

from .errors import (
    FormatError,
    HorizonExhausted,
    InvariantViolation,
    MonotonicityError,
    PreconditionError,
    RateFlagError,
    RegainError,
)
from .foundation import Dyadic, FinSet, bits_value, is_prefix, log_len, pair, real_prefix, set_to_real, unpair

__version__ = "0.1.0"

__all__ = [
    "Dyadic",
    "FinSet",
    "pair",
    "unpair",
    "log_len",
    "set_to_real",
    "real_prefix",
    "is_prefix",
    "bits_value",
    "RegainError",
    "MonotonicityError",
    "RateFlagError",
    "HorizonExhausted",
    "PreconditionError",
    "InvariantViolation",
    "FormatError",
]
