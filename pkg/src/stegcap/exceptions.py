"""Exception types shared across stegcap.

The CLI maps each class to its own exit status, so library code raises the
most specific one that applies.
"""


class StegcapError(Exception):
    """Base class for all stegcap errors."""


class ValidationError(StegcapError, ValueError):
    """Malformed input: bad distribution, wrong alphabet, bad block length."""


class BudgetExceededError(StegcapError, RuntimeError):
    """An exhaustive computation would exceed its enumeration budget."""


class DomainError(StegcapError, ArithmeticError):
    """A quantity is undefined or unbounded for the given parameters."""
