"""Exception types and the dense-allocation memory budget."""

import os

# Default cap on any single dense allocation (bytes). Override with
# the JFFT_MEM_BUDGET environment variable.
DEFAULT_MEM_BUDGET = 4 * 1024**3


class JfftError(Exception):
    """Base class for all package errors."""


class UsageError(JfftError):
    """Malformed command line (CLI exit code 1)."""


class InputError(JfftError):
    """Invalid user-supplied data: bad subsets, malformed CSV, bad options
    (CLI exit code 2)."""


class PlanFormatError(InputError):
    """Unreadable or incompatible plan file: bad JSON, wrong version."""


class VerificationError(JfftError):
    """A plan or transform invariant does not hold (CLI exit code 3)."""


class NumericalError(VerificationError):
    """A numerical guarantee failed beyond tolerance (e.g. a block matrix
    that should be symmetric is not)."""


class InternalError(JfftError):
    """Internal consistency violation; indicates a bug, not bad input."""


class BudgetError(JfftError):
    """A dense allocation would exceed the memory budget (CLI exit code 4)."""


def mem_budget() -> int:
    raw = os.environ.get("JFFT_MEM_BUDGET")
    if raw is None:
        return DEFAULT_MEM_BUDGET
    try:
        budget = int(raw)
    except ValueError as exc:
        raise InputError(f"JFFT_MEM_BUDGET must be an integer byte count, got {raw!r}") from exc
    if budget <= 0:
        raise InputError("JFFT_MEM_BUDGET must be positive")
    return budget


def check_budget(nbytes: int, what: str = "dense allocation") -> None:
    """Raise BudgetError if a planned allocation of `nbytes` exceeds the budget."""
    budget = mem_budget()
    if nbytes > budget:
        raise BudgetError(
            f"{what} needs {nbytes} bytes, exceeding the budget of {budget} "
            f"(set JFFT_MEM_BUDGET to raise it)"
        )
