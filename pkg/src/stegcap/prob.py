"""Finite-alphabet probability primitives and method-of-types helpers.

Everything is computed in nats internally and converted at the boundary via
the ``base`` argument (2 for bits, ``math.e`` or ``"e"`` for nats).
"""

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ValidationError
from .validation import (
    check_block_length,
    check_probability_vector,
    log_factor,
)


@dataclass(frozen=True)
class Distribution:
    """Probability vector over the alphabet ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        p = check_probability_vector(self.probs)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self):
        return self.probs.size

    @classmethod
    def uniform(cls, k):
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def point_mass(cls, k, at=0):
        p = np.zeros(k)
        p[at] = 1.0
        return cls(p)

    @property
    def support(self):
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True)
class JointDistribution:
    """Joint law p(x, z) stored as an ``input_size x output_size`` matrix."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2:
            raise ValidationError("joint distribution must be a matrix")
        check_probability_vector(p.ravel())
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_channel(cls, px, w):
        """Joint of an input law ``px`` pushed through row-stochastic ``w``."""
        px = px.probs if isinstance(px, Distribution) else np.asarray(px, dtype=float)
        w = np.asarray(getattr(w, "matrix", w), dtype=float)
        return cls(px[:, None] * w)

    @property
    def input_size(self):
        return self.probs.shape[0]

    @property
    def output_size(self):
        return self.probs.shape[1]

    def marginal_x(self):
        return Distribution(self.probs.sum(axis=1))

    def marginal_z(self):
        return Distribution(self.probs.sum(axis=0))


@dataclass(frozen=True)
class TypeVector:
    """Empirical distribution of a length-``n`` block, stored as letter counts."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 0 for c in counts):
            raise ValidationError(f"type counts must be non-negative, got {self.counts!r}")
        if sum(counts) < 1:
            raise ValidationError("type must describe a block of length >= 1")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self):
        return sum(self.counts)

    @property
    def alphabet_size(self):
        return len(self.counts)

    @property
    def support_size(self):
        return sum(1 for c in self.counts if c > 0)

    def as_distribution(self):
        return Distribution(np.array(self.counts, dtype=float) / self.n)

    @classmethod
    def of(cls, block, alphabet_size):
        """Type of ``block`` whose letters are ``0..alphabet_size-1``."""
        counter = Counter(block)
        if any(not 0 <= a < alphabet_size for a in counter):
            raise ValidationError("block letter outside alphabet")
        return cls(tuple(counter.get(a, 0) for a in range(alphabet_size)))


def entropy(p, base=2):
    """Shannon entropy, with ``0 log 0 = 0``."""
    probs = p.probs if isinstance(p, Distribution) else check_probability_vector(p)
    nz = probs[probs > 0]
    return float(-(nz * np.log(nz)).sum()) / log_factor(base)


def binary_entropy(q, base=2):
    return entropy(np.array([q, 1.0 - q]), base)


def mutual_information(joint, base=2):
    """I(X;Z) computed directly from the joint matrix."""
    pxz = joint.probs
    px = pxz.sum(axis=1, keepdims=True)
    pz = pxz.sum(axis=0, keepdims=True)
    mask = pxz > 0
    # in logs: px * pz can underflow when one marginal is subnormal
    rows, cols = np.nonzero(mask)
    log_ratio = np.log(pxz[mask]) - np.log(px[rows, 0]) - np.log(pz[0, cols])
    return float((pxz[mask] * log_ratio).sum()) / log_factor(base)


def kl_divergence(p, q, base=2):
    p = p.probs if isinstance(p, Distribution) else check_probability_vector(p)
    q = q.probs if isinstance(q, Distribution) else check_probability_vector(q)
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    return float((p[mask] * (np.log(p[mask]) - np.log(q[mask]))).sum()) / log_factor(base)


def information_density(joint, x, z, base=2):
    """log p(z|x) / p(z) for one (input, output) letter pair.

    Returns ``-inf`` when ``p(z|x) = 0`` but ``p(z) > 0``.
    """
    pxz = joint.probs
    px = pxz[x, :].sum()
    pz = pxz[:, z].sum()
    if pz <= 0:
        raise DomainError(f"output {z!r} has zero marginal probability")
    if px <= 0:
        raise DomainError(f"input {x!r} has zero probability; p(z|x) undefined")
    cond = pxz[x, z] / px
    if cond == 0:
        return -math.inf
    return (math.log(cond) - math.log(pz)) / log_factor(base)


def type_class_size(t):
    """Exact multinomial coefficient n! / (n_1! ... n_K!)."""
    size = math.factorial(t.n)
    for c in t.counts:
        size //= math.factorial(c)
    return size


def stirling_slack(n, support_size, base=2):
    """(s/n) log(sqrt(2 pi n) e^{1/2}): the gap between H(p_n) and the lower bound."""
    return support_size / n * (0.5 * math.log(2 * math.pi * n) + 0.5) / log_factor(base)


def type_class_entropy_bounds(t, base=2):
    """Return ``(lower, upper, value)`` for the type-class rate (1/n) log |T(t)|.

    ``upper`` is the empirical entropy H(t); ``lower`` subtracts the
    Stirling slack over the support of ``t``.
    """
    n = t.n
    upper = entropy(t.as_distribution(), base)
    lower = upper - stirling_slack(n, t.support_size, base)
    value = math.log(type_class_size(t)) / n / log_factor(base)
    # |T(t)| <= exp(n H(t)) exactly; clamp the last-ulp rounding of the two logs
    value = min(value, upper)
    return lower, upper, value


def iter_types(n, k):
    """Yield every TypeVector of length ``n`` over ``k`` letters (stars and bars)."""
    n = check_block_length(n)
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + bars + (n + k - 1,)
        yield TypeVector(tuple(edges[i + 1] - edges[i] - 1 for i in range(k)))


def nearest_type(p, n):
    """Round ``n * p`` to integer counts summing to ``n`` (largest remainder).

    Letters outside the support of ``p`` always get count 0, so the result is
    absolutely continuous with respect to ``p``.
    """
    probs = p.probs if isinstance(p, Distribution) else check_probability_vector(p)
    n = check_block_length(n)
    scaled = probs * n
    counts = np.floor(scaled).astype(int)
    short = n - counts.sum()
    order = np.argsort(-(scaled - counts), kind="stable")
    for i in order[:short]:
        counts[i] += 1
    if np.any((counts > 0) & (probs == 0)):
        raise ValidationError("rounded type leaves the support of p")
    return TypeVector(tuple(counts.tolist()))
