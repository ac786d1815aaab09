"""Exception types shared across the package."""

from __future__ import annotations


class BwBoundsError(Exception):
    """Base class for all package-specific errors."""


class IndependenceViolation(BwBoundsError):
    """An integer combination of the exponents was certified to be an integer.

    Carries the witnessing integer vector ``q`` and the integer ``p`` with
    q . x = p, so callers can report exactly which relation failed.
    """

    def __init__(self, q, p, message=None):
        self.q = tuple(int(v) for v in q)
        self.p = int(p)
        if message is None:
            message = f"exponent relation q={self.q} gives q.x = {self.p} exactly"
        super().__init__(message)


class PrecisionExhausted(BwBoundsError):
    """A certified decision could not be made within the escalation budget."""


class TowerOverflow(BwBoundsError):
    """A Liouville fixture exponent exceeded the representable bit budget."""


class SingularSystem(BwBoundsError):
    """A linear system pivot could not be certified nonzero."""


class BudgetExceeded(BwBoundsError):
    """A requested computation exceeds the configured size budget."""
