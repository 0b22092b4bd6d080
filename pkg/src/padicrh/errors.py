"""Shared exception types.

Every failure mode that callers are expected to branch on gets its own class;
anything else is a plain ValueError/ZeroDivisionError from the stdlib.
"""


class WorkbenchError(Exception):
    """Base class for all package-specific errors."""


class ConfigMismatch(WorkbenchError):
    """Operands belong to different field/ring configurations."""


class PrecisionExhausted(WorkbenchError):
    """A question was asked that the stored precision cannot answer.

    Raised instead of guessing: inverting an element indistinguishable from
    zero, taking the valuation of an inexact zero, or pivoting on entries
    whose vanishing cannot be certified.
    """


class DivergentSeries(WorkbenchError):
    """Argument outside the convergence domain of exp/log or a matrix series."""


class TruncationOverflow(WorkbenchError):
    """An operation needed terms beyond the stored truncation order."""


class CommutationFailure(WorkbenchError):
    """Operators that were required to commute provably do not."""


class NotSmall(WorkbenchError):
    """Input failed the smallness gate that the algorithm's convergence needs."""


class SizeLimit(WorkbenchError):
    """A certified enumeration exceeded its configured desk-scale bound."""
