"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import math

import numpy as np

from .exceptions import BudgetExceededError, ValidationError

#: Default cap on the number of n-tuples any exhaustive routine may visit.
DEFAULT_BUDGET = 2 ** 24

PROB_ATOL = 1e-12


def log_factor(base):
    """Return the divisor turning nats into units of ``base``.

    ``base`` may be a positive real other than 1, or the strings ``"e"``,
    ``"2"`` used on the command line.
    """
    if isinstance(base, str):
        if base == "e":
            return 1.0
        try:
            base = float(base)
        except ValueError:
            raise ValidationError(f"unknown log base {base!r}") from None
    if base == math.e:
        return 1.0
    if not base > 0 or base == 1:
        raise ValidationError(f"log base must be positive and != 1, got {base!r}")
    return math.log(base)


def unit_name(base):
    f = log_factor(base)
    if f == 1.0:
        return "nats"
    if f == math.log(2):
        return "bits"
    return f"log{base}"


def check_probability_vector(p, atol=PROB_ATOL):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("probability vector must be 1-d and non-empty")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValidationError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > atol:
        raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def check_stochastic_matrix(w, atol=PROB_ATOL):
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or 0 in w.shape:
        raise ValidationError("kernel must be a non-empty 2-d matrix")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValidationError("kernel entries must be finite and non-negative")
    bad = np.abs(w.sum(axis=1) - 1.0) > atol
    if np.any(bad):
        raise ValidationError(f"kernel rows {np.flatnonzero(bad).tolist()} do not sum to 1")
    return w


def check_block_length(n, minimum=1):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < minimum:
        raise ValidationError(f"block length must be an integer >= {minimum}, got {n!r}")
    return int(n)


def check_block(y, alphabet=None):
    """Coerce ``y`` to a tuple and check every letter lies in ``alphabet``."""
    if isinstance(y, np.ndarray):
        if y.ndim != 1:
            raise ValidationError("a block must be one-dimensional")
        y = y.tolist()
    try:
        y = tuple(y)
    except TypeError:
        raise ValidationError(f"block must be a sequence, got {type(y).__name__}") from None
    if len(y) == 0:
        raise ValidationError("empty block")
    if alphabet is not None:
        allowed = set(alphabet)
        for letter in y:
            if letter not in allowed:
                raise ValidationError(f"letter {letter!r} not in alphabet {tuple(alphabet)!r}")
    return y


def check_blocks(Y):
    """Return ``Y`` as a 2-d float array of stacked blocks (one per row)."""
    Y = np.asarray(Y)
    if Y.ndim == 1:
        Y = Y[np.newaxis, :]
    if Y.ndim != 2 or Y.shape[1] == 0:
        raise ValidationError("expected a 2-d array of blocks, one block per row")
    return Y


def check_budget(size, budget, what="tuples"):
    if budget is None:
        budget = DEFAULT_BUDGET
    if size > budget:
        raise BudgetExceededError(
            f"{what}: {size} exceeds the enumeration budget {budget}; "
            "use a count-only path or raise the budget"
        )
    return size
