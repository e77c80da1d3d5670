"""Slow reference computations kept apart from the library's vectorized paths."""

import itertools
import math

import numpy as np

from stegcap.channel import DMC
from stegcap.steganalyzer import ExplicitSetSteganalyzer, MemorylessSteganalyzer, SumSteganalyzer


def block_prob(w, z, x):
    return math.prod(w.matrix[w.input_alphabet.index(a), w.output_alphabet.index(b)] for a, b in zip(x, z))


def decode(code, q, z):
    if isinstance(code.decoder, dict):
        return code.decoder[z]
    if code.decoder == "ml":
        best, arg = -1.0, None
        for i, u in enumerate(code.codewords):
            p = block_prob(q, z, u)
            if p > best:
                best, arg = p, i
        return arg
    dists = [sum(a != b for a, b in zip(u, z)) for u in code.codewords]
    return dists.index(min(dists))


def brute_epsilon(code, q):
    total = 0.0
    for i, u in enumerate(code.codewords):
        for z in itertools.product(q.output_alphabet, repeat=code.n):
            if decode(code, q, z) != i:
                total += block_prob(q, z, u)
    return total / code.M


def brute_delta(code, w, g):
    total = 0.0
    for u in code.codewords:
        for y in itertools.product(w.output_alphabet, repeat=code.n):
            total += block_prob(w, y, u) * g.classify(y)
    return total / code.M


def random_dmc(rng, kx, ky, sparsity=0.3):
    m = rng.dirichlet(np.ones(ky), size=kx)
    m[rng.random(m.shape) < sparsity] = 0.0
    for row in m:
        if row.sum() == 0:
            row[rng.integers(ky)] = 1.0
    return DMC(m / m.sum(axis=1, keepdims=True))


def random_steganalyzer(rng, ky, n):
    kind = rng.integers(3)
    letters = tuple(range(ky))
    if kind == 0 and ky == 2:
        return SumSteganalyzer()
    if kind <= 1:
        k = int(rng.integers(1, ky + 1))
        return MemorylessSteganalyzer(tuple(sorted(rng.choice(ky, size=k, replace=False).tolist())), letters)
    blocks = list(itertools.product(letters, repeat=n))
    keep = [b for b in blocks if rng.random() < 0.5]
    return ExplicitSetSteganalyzer({n: keep}, letters)


def feinstein_instance(rng):
    """Small near-deterministic DMC with slack and target size chosen so the
    Feinstein bound is usually below 1 (otherwise the guarantee is vacuous)."""
    from stegcap.prob import JointDistribution, mutual_information

    kx, ky = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    n = int(rng.integers(4, 7))
    eta = rng.uniform(0, 0.15)
    base = np.zeros((kx, ky))
    for i in range(kx):
        base[i, i % ky] = 1
    w = DMC((1 - eta) * base + eta * rng.dirichlet(np.ones(ky), size=kx))
    px = rng.dirichlet(np.ones(kx) * 3)
    mi = mutual_information(JointDistribution.from_channel(px, w.matrix), base="e")
    gamma = float(rng.uniform(0.2, 0.4))
    target = max(2, math.floor(math.exp(n * (mi - gamma) / 2)))
    return w, px, n, gamma, target
