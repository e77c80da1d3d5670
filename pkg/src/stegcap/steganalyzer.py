"""Steganalyzer sequences {g_n} and their permissible sets.

A steganalyzer maps an n-block to 1 (flagged as steganographic) or 0
(permissible).  All variants here are analytic detectors: ``fit`` is a no-op
except for :class:`TypeClassSteganalyzer`, which can learn its reference
types from cover blocks.  Each variant implements a vectorized
``_permissible_mask`` over a 2-d array of blocks, which is what the
exhaustive enumerators use.
"""

import itertools
import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .config import format_tuples, parse_config, parse_letters, parse_number
from .exceptions import BudgetExceededError, ValidationError
from .prob import Distribution, TypeVector, nearest_type, type_class_size
from .validation import DEFAULT_BUDGET, check_block, check_block_length, check_blocks, check_budget

ENUM_CHUNK = 1 << 18


@dataclass(frozen=True)
class PermissibleSet:
    """P_{g_n}: the blocks of length ``n`` that ``g_n`` lets through.

    ``members`` is ``None`` when only the count was computed.
    """

    n: int
    count: int
    alphabet_size: int = None
    members: frozenset = field(default=None, repr=False)

    def __len__(self):
        return self.count

    def __contains__(self, y):
        if self.members is None:
            raise ValidationError("membership unavailable: set was counted, not enumerated")
        return tuple(y) in self.members

    @property
    def impermissible_count(self):
        return self.alphabet_size ** self.n - self.count

    def sorted_members(self):
        return sorted(self.members)

    def to_text(self):
        """One tuple per line, letters separated by spaces."""
        return format_tuples(self.sorted_members())


class Steganalyzer(BaseEstimator, ClassifierMixin):
    """Common interface for every steganalyzer variant.

    ``alphabet`` is a tuple of letters, or ``None`` for the real line.
    """

    classes_ = np.array([0, 1])

    @property
    def letters(self):
        return None

    def fit(self, X=None, y=None):
        return self

    def _permissible_mask(self, Y):
        raise NotImplementedError

    def predict(self, X):
        """Classify each row of ``X``: 1 = steganographic, 0 = permissible."""
        X = check_blocks(X)
        if self.letters is not None:
            bad = ~np.isin(X, np.asarray(self.letters))
            if np.any(bad):
                raise ValidationError(f"letter {X[bad][0]!r} not in alphabet {self.letters!r}")
        return (~self._permissible_mask(X)).astype(int)

    def classify(self, y):
        y = check_block(y, self.letters)
        return int(self.predict(np.asarray([y]))[0])

    def closed_form_count(self, n):
        """|P_{g_n}| from a formula, or ``None`` if this variant has none."""
        return None

    def count_permissible(self, n, budget=DEFAULT_BUDGET):
        """|P_{g_n}|, by closed form when available, else by enumeration."""
        count = self.closed_form_count(n)
        if count is not None:
            return count
        return enumerate_permissible(self, n, budget=budget, members=False).count

    def same_alphabet(self, other):
        a, b = self.letters, other.letters
        if a is None or b is None:
            return a is b
        return set(a) == set(b)


def _iter_blocks(letters, n, budget):
    """Yield chunks of the full product ``letters^n`` in lexicographic order."""
    k = len(letters)
    total = check_budget(k ** n, budget)
    alphabet = np.asarray(letters)
    weights = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, ENUM_CHUNK):
        idx = np.arange(start, min(start + ENUM_CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // weights) % k
        yield alphabet[digits]


def enumerate_permissible(g, n, budget=DEFAULT_BUDGET, members=True):
    """Exhaustively enumerate P_{g_n} over the finite alphabet of ``g``.

    With ``members=False`` only the count is kept, which is what makes
    n around 20 affordable over a binary alphabet.
    """
    n = check_block_length(n)
    if g.letters is None:
        raise ValidationError("cannot enumerate a steganalyzer over a continuous alphabet")
    try:
        chunks = _iter_blocks(g.letters, n, budget)
        count = 0
        found = [] if members else None
        for Y in chunks:
            mask = g._permissible_mask(Y)
            count += int(mask.sum())
            if members:
                found.extend(map(tuple, Y[mask].tolist()))
    except BudgetExceededError as exc:
        raise BudgetExceededError(
            f"{exc}; closed-form count: {'available' if g.closed_form_count(n) is not None else 'none'}"
        ) from None
    return PermissibleSet(n, count, len(g.letters), frozenset(found) if members else None)


def count_sum_permissible(n, method="closed_form"):
    """|P_n| of the sum steganalyzer.

    ``method="closed_form"`` uses the parity form (2^{n-1}, plus half the
    central binomial for even n); ``method="sum"`` adds the binomials
    C(n, i) for i <= floor(n/2) directly.
    """
    n = check_block_length(n)
    if method == "sum":
        return sum(math.comb(n, i) for i in range(n // 2 + 1))
    if method != "closed_form":
        raise ValidationError(f"unknown method {method!r}")
    if n % 2:
        return 2 ** (n - 1)
    # gmpy2: math.comb on Python 3.10 is too slow for sweeps up to n = 10^4
    return 2 ** (n - 1) + int(gmpy2.comb(n, n // 2)) // 2



class SumSteganalyzer(Steganalyzer):
    """Binary detector that fires when more than floor(n/2) letters are 1."""

    @property
    def letters(self):
        return (0, 1)

    def _permissible_mask(self, Y):
        return Y.sum(axis=1) <= Y.shape[1] // 2

    def closed_form_count(self, n):
        return count_sum_permissible(n)


class MemorylessSteganalyzer(Steganalyzer):
    """Fires if any single letter falls outside ``permissible``.

    Parameters
    ----------
    permissible : iterable of letters
        The per-letter permissible set P_g.
    alphabet : iterable of letters
        The full letter alphabet Y; must contain ``permissible``.
    """

    def __init__(self, permissible=(0,), alphabet=(0, 1)):
        self.permissible = permissible
        self.alphabet = alphabet

    @property
    def letters(self):
        letters = tuple(self.alphabet)
        if len(set(letters)) != len(letters):
            raise ValidationError("alphabet letters must be distinct")
        return letters

    @property
    def permissible_letters(self):
        allowed = frozenset(self.permissible)
        if not allowed <= set(self.letters):
            raise ValidationError("per-letter permissible set must be a subset of the alphabet")
        return allowed

    def _permissible_mask(self, Y):
        return np.isin(Y, np.asarray(sorted(self.permissible_letters))).all(axis=1)

    def classify_letter(self, letter):
        return 0 if letter in self.permissible_letters else 1

    def closed_form_count(self, n):
        return len(self.permissible_letters) ** check_block_length(n)


def lift_memoryless(letter_rule, alphabet):
    """Lift a per-letter detector to the whole sequence {g_n}.

    ``letter_rule`` is either the per-letter permissible subset or a callable
    returning 1 for letters that trigger detection.
    """
    alphabet = tuple(alphabet)
    if callable(letter_rule):
        permissible = tuple(a for a in alphabet if letter_rule(a) == 0)
    else:
        permissible = tuple(letter_rule)
    return MemorylessSteganalyzer(permissible=permissible, alphabet=alphabet)


def vacuous(alphabet):
    """A steganalyzer that never fires."""
    return lift_memoryless(alphabet, alphabet)


class VarianceSteganalyzer(Steganalyzer):
    """Power detector: fires when (1/n) sum y_i^2 exceeds ``c``.

    The statistic is uncentered, so this is a power threshold rather than a
    sample-variance test.
    """

    def __init__(self, c=1.0):
        self.c = c

    def _permissible_mask(self, Y):
        if not self.c > 0:
            raise ValidationError(f"power threshold must be positive, got {self.c!r}")
        Y = np.asarray(Y, dtype=float)
        return np.mean(Y * Y, axis=1) <= self.c


class MeanSignSteganalyzer(Steganalyzer):
    """Fires on a strictly negative (or strictly positive) letter sum.

    A zero-sum block passes both directions.
    """

    def __init__(self, direction="negative", alphabet=(-1, 1)):
        self.direction = direction
        self.alphabet = alphabet

    @property
    def letters(self):
        return tuple(self.alphabet)

    def _permissible_mask(self, Y):
        s = np.asarray(Y, dtype=float).sum(axis=1)
        if self.direction == "negative":
            return s >= 0
        if self.direction == "positive":
            return s <= 0
        raise ValidationError(f"direction must be 'negative' or 'positive', got {self.direction!r}")


class ExplicitSetSteganalyzer(Steganalyzer):
    """Permissible sets listed block length by block length.

    ``sets`` maps n to an iterable of n-tuples.  Lengths missing from the
    map have an empty permissible set.
    """

    def __init__(self, sets=None, alphabet=(0, 1)):
        self.sets = sets
        self.alphabet = alphabet

    @property
    def letters(self):
        return tuple(self.alphabet)

    def _frozen(self, n):
        cache = self.__dict__.setdefault("_set_cache", {})
        if n not in cache:
            members = frozenset(tuple(t) for t in (self.sets or {}).get(n, ()))
            letters = set(self.letters)
            for t in members:
                if len(t) != n or not set(t) <= letters:
                    raise ValidationError(f"explicit set for n={n} holds {t!r}, not an n-tuple over the alphabet")
            cache[n] = members
        return cache[n]

    def _permissible_mask(self, Y):
        members = self._frozen(Y.shape[1])
        return np.fromiter((tuple(row) in members for row in Y.tolist()), dtype=bool, count=len(Y))

    def closed_form_count(self, n):
        return len(self._frozen(check_block_length(n)))


class TypeClassSteganalyzer(Steganalyzer):
    """Empirical-distribution detector: passes exactly the blocks whose type
    equals the reference type at that length.

    ``reference`` is either a Distribution (reference types are its nearest
    types, see :func:`~stegcap.prob.nearest_type`) or a mapping n -> counts.
    ``fit(X)`` instead records the type of each cover block in ``X``, one
    reference per block length.  Letters are ``0..alphabet_size-1``.
    """

    def __init__(self, reference=None, alphabet_size=2):
        self.reference = reference
        self.alphabet_size = alphabet_size

    @property
    def letters(self):
        return tuple(range(self.alphabet_size))

    def fit(self, X, y=None):
        rows = X if isinstance(X, (list, tuple)) else list(np.asarray(X))
        self.reference_types_ = {}
        for row in rows:
            t = TypeVector.of(tuple(int(a) for a in row), self.alphabet_size)
            self.reference_types_[t.n] = t
        return self

    def reference_type(self, n):
        fitted = getattr(self, "reference_types_", None)
        if fitted is not None:
            if n not in fitted:
                raise ValidationError(f"no cover block of length {n} was seen in fit")
            return fitted[n]
        if self.reference is None:
            raise ValidationError("TypeClassSteganalyzer needs a reference or a fit() call")
        if isinstance(self.reference, Distribution):
            t = nearest_type(self.reference, n)
        elif callable(self.reference):
            t = self.reference(n)
        else:
            t = self.reference[n]
        t = t if isinstance(t, TypeVector) else TypeVector(tuple(t))
        if t.n != n or t.alphabet_size != self.alphabet_size:
            raise ValidationError(f"reference type {t.counts} does not describe length-{n} blocks")
        return t

    def _permissible_mask(self, Y):
        t = self.reference_type(Y.shape[1])
        mask = np.ones(len(Y), dtype=bool)
        for a, c in enumerate(t.counts):
            mask &= (Y == a).sum(axis=1) == c
        return mask

    def closed_form_count(self, n):
        return type_class_size(self.reference_type(check_block_length(n)))


class CompositeSteganalyzer(Steganalyzer):
    """Two detectors in series: a block passes only if both let it through."""

    def __init__(self, left=None, right=None):
        self.left = left
        self.right = right

    @property
    def letters(self):
        return self.left.letters

    def _permissible_mask(self, Y):
        return self.left._permissible_mask(Y) & self.right._permissible_mask(Y)

    def closed_form_count(self, n):
        l, r = self.left, self.right
        if isinstance(l, MemorylessSteganalyzer) and isinstance(r, MemorylessSteganalyzer):
            return len(l.permissible_letters & r.permissible_letters) ** check_block_length(n)
        return None


def compose(g, v):
    """Series composition; P_h = P_g ∩ P_v at every block length."""
    if not g.same_alphabet(v):
        raise ValidationError(f"alphabet mismatch: {g.letters!r} vs {v.letters!r}")
    return CompositeSteganalyzer(left=g, right=v)


def brute_force_permissible(g, n):
    """Permissible set by calling :meth:`classify` on every tuple.

    Slow on purpose: an independent path for checking the vectorized
    enumerator.
    """
    return {y for y in itertools.product(g.letters, repeat=n) if g.classify(y) == 0}


def from_config(cfg, prefix=""):
    """Build a steganalyzer from flat ``key = value`` settings.

    Recognised ``variant`` values and their keys::

        sum
        memoryless   alphabet, permissible
        variance     c
        mean_sign    direction, alphabet
        type_class   reference (probabilities), alphabet_size
        explicit     alphabet, members.<n> (tuples separated by ';')
        composite    left.*, right.*  (nested settings)
    """
    if isinstance(cfg, str):
        cfg = parse_config(cfg)

    def get(key, default=None):
        value = cfg.get(prefix + key, default)
        if value is None:
            raise ValidationError(f"missing config key {prefix + key!r}")
        return value

    variant = get("variant").lower()
    if variant == "sum":
        return SumSteganalyzer()
    if variant == "memoryless":
        return MemorylessSteganalyzer(permissible=parse_letters(get("permissible")), alphabet=parse_letters(get("alphabet")))
    if variant == "variance":
        c = parse_number(get("c"))
        if not c > 0:
            raise ValidationError("variance steganalyzer needs c > 0")
        return VarianceSteganalyzer(c=c)
    if variant == "mean_sign":
        return MeanSignSteganalyzer(direction=get("direction", "negative"), alphabet=parse_letters(get("alphabet", "-1 1")))
    if variant == "type_class":
        probs = np.array(parse_letters(get("reference")), dtype=float)
        return TypeClassSteganalyzer(reference=Distribution(probs / probs.sum()), alphabet_size=len(probs))
    if variant == "explicit":
        sets = {}
        for key, value in cfg.items():
            if key.startswith(prefix + "members."):
                n = int(key[len(prefix + "members."):])
                sets[n] = [parse_letters(t) for t in value.split(";") if t.strip()]
        return ExplicitSetSteganalyzer(sets=sets, alphabet=parse_letters(get("alphabet")))
    if variant == "composite":
        return compose(from_config(cfg, prefix + "left."), from_config(cfg, prefix + "right."))
    raise ValidationError(f"unknown steganalyzer variant {variant!r}")


def from_spec(text):
    """Parse the short command-line form, e.g. ``sum``, ``variance:c=3``,
    ``memoryless:alphabet=0 1 2,permissible=0 1``."""
    name, _, params = text.partition(":")
    cfg = {"variant": name.strip()}
    for item in filter(None, (s.strip() for s in params.split(","))):
        k, sep, v = item.partition("=")
        if not sep:
            raise ValidationError(f"expected key=value in {text!r}")
        cfg[k.strip()] = v.strip()
    return from_config(cfg)
