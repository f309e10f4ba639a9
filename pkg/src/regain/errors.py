from __future__ import annotations


class RegainError(Exception):
    """Base class for every error raised by the package."""


class MonotonicityError(RegainError):
    """An approximation sequence broke its declared monotonicity."""


class RateFlagError(RegainError):
    """A rate/index function violated one of its declared flags."""


class HorizonExhausted(RegainError):
    """A search the construction writes as unbounded ran past its horizon."""


class PreconditionError(RegainError):
    """Input does not meet the operation's precondition."""


class InvariantViolation(RegainError):
    """A claim scan found a counterexample."""

    def __init__(self, claim: str, detail: str = ""):
        self.claim = claim
        self.detail = detail
        super().__init__(f"{claim}: {detail}" if detail else claim)


class FormatError(RegainError):
    """Malformed input file or trace."""
