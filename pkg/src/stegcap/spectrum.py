"""Finite-n information spectra.

A spectrum is the distribution of a normalised density, either the entropy
density (1/n) log 1/p(X^n) or the information density
(1/n) log Q^n(Z^n|X^n) / p(Z^n).  Exact mode enumerates every block; sampled
mode draws blocks with a seeded generator.  Both modes evaluate densities
through the same functions, so their atoms coincide.

Only finite-n spectra and outage curves are produced.  Spectral inf/sup
rates are limits and are left to the reader of the curves.
"""

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import DMC, BlockKernel, GaussianChannel, as_rng, compose_kernels
from .exceptions import ValidationError
from .prob import Distribution, JointDistribution, entropy, mutual_information
from .validation import DEFAULT_BUDGET, check_block_length, check_budget, check_probability_vector, log_factor, unit_name


class IIDSource:
    """Blocks of i.i.d. letters drawn from ``p`` over ``letters``."""

    def __init__(self, p, letters=None):
        self.p = p if isinstance(p, Distribution) else Distribution(p)
        self.letters = tuple(range(self.p.alphabet_size)) if letters is None else tuple(letters)
        self._logp = np.log(np.where(self.p.probs > 0, self.p.probs, 1.0))
        self._logp[self.p.probs == 0] = -np.inf

    def support(self, n, budget=DEFAULT_BUDGET):
        idx = np.flatnonzero(self.p.probs > 0)
        check_budget(len(idx) ** n, budget, "source support blocks")
        blocks = np.array(list(itertools.product(idx, repeat=n)), dtype=np.int64).reshape(-1, n)
        return blocks

    def log_prob(self, blocks):
        return self._logp[blocks].sum(axis=1)

    def draw(self, n, size, rng):
        return rng.choice(self.p.alphabet_size, size=(size, n), p=self.p.probs)


class BlockSource:
    """An arbitrary law on letters^n, given as probabilities in lexicographic order."""

    def __init__(self, probs, letters, n):
        self.letters = tuple(letters)
        self.n = check_block_length(n)
        probs = check_probability_vector(probs, atol=1e-9)
        if probs.size != len(self.letters) ** self.n:
            raise ValidationError(f"block law has {probs.size} entries, expected {len(self.letters) ** self.n}")
        self.probs = probs
        k = len(self.letters)
        self._weights = k ** np.arange(n - 1, -1, -1, dtype=np.int64)

    def _check_n(self, n):
        if n != self.n:
            raise ValidationError(f"this source only describes blocks of length {self.n}")

    def _index(self, blocks):
        return blocks @ self._weights

    def _blocks(self, idx):
        return (idx[:, None] // self._weights) % len(self.letters)

    def support(self, n, budget=DEFAULT_BUDGET):
        self._check_n(n)
        idx = np.flatnonzero(self.probs > 0)
        check_budget(idx.size, budget, "source support blocks")
        return self._blocks(idx)

    def log_prob(self, blocks):
        p = self.probs[self._index(blocks)]
        with np.errstate(divide="ignore"):
            return np.log(p)

    def draw(self, n, size, rng):
        self._check_n(n)
        return self._blocks(rng.choice(self.probs.size, size=size, p=self.probs))


class UniformSource:
    """Uniform law on an explicit set of blocks (e.g. a permissible set).

    The log-probability of every member is exactly ``-log(len(members))``.
    """

    def __init__(self, members, letters):
        self.letters = tuple(letters)
        index = {a: i for i, a in enumerate(self.letters)}
        members = sorted(set(tuple(m) for m in members))
        if not members:
            raise ValidationError("uniform source over an empty set")
        self.n = len(members[0])
        self.blocks = np.array([[index[a] for a in m] for m in members], dtype=np.int64)
        self._logm = math.log(len(members))
        self._member = {tuple(r) for r in self.blocks.tolist()}

    def support(self, n, budget=DEFAULT_BUDGET):
        if n != self.n:
            raise ValidationError(f"this source only describes blocks of length {self.n}")
        check_budget(len(self.blocks), budget, "source support blocks")
        return self.blocks

    def log_prob(self, blocks):
        inside = np.fromiter((tuple(r) in self._member for r in blocks.tolist()), dtype=bool, count=len(blocks))
        return np.where(inside, -self._logm, -np.inf)

    def draw(self, n, size, rng):
        self.support(n)
        return self.blocks[rng.integers(len(self.blocks), size=size)]


class GaussianSource:
    """i.i.d. N(0, power) letters; sampled mode only."""

    def __init__(self, power):
        if not power > 0:
            raise ValidationError("Gaussian source power must be positive")
        self.power = float(power)

    def draw(self, n, size, rng):
        return rng.normal(0.0, math.sqrt(self.power), size=(size, n))

    def log_prob(self, blocks):
        n = blocks.shape[1]
        return -0.5 * n * math.log(2 * math.pi * self.power) - (blocks * blocks).sum(axis=1) / (2 * self.power)


def as_source(source):
    if isinstance(source, (IIDSource, BlockSource, UniformSource, GaussianSource)):
        return source
    if isinstance(source, Distribution):
        return IIDSource(source)
    if isinstance(source, (list, tuple, np.ndarray)):
        return IIDSource(Distribution(source))
    raise ValidationError(f"cannot interpret {type(source).__name__} as a source")


@dataclass
class SpectrumSample:
    """Atoms ``values`` with weights ``probs`` (exact probabilities, or 1/draws)."""

    n: int
    values: np.ndarray
    probs: np.ndarray
    mode: str
    base: object = 2
    draws: int = None
    seed: object = None

    def mean(self):
        return float(np.dot(self.values, self.probs))

    def cdf(self, r):
        return float(self.probs[self.values <= r].sum())

    def merged(self, decimals=12):
        """Combine atoms whose values agree to ``decimals`` places."""
        keys = np.round(self.values, decimals)
        uniq, inv = np.unique(keys, return_inverse=True)
        weights = np.bincount(inv, weights=self.probs)
        first = np.zeros(len(uniq), dtype=np.int64)
        first[inv[::-1]] = np.arange(len(inv))[::-1]
        return self.values[first], weights

    def write_csv(self, fh):
        values, weights = self.merged()
        unit = unit_name(self.base)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"value_{unit}", "probability"])
        for v, p in zip(values, weights):
            w.writerow([repr(float(v)), repr(float(p))])


def _check_draws(draws):
    if draws is None or draws < 1:
        raise ValidationError("sampled mode needs a positive number of draws")
    return int(draws)


def entropy_spectrum(source, n, mode="exact", draws=None, seed=None, base=2, budget=DEFAULT_BUDGET):
    """Distribution of (1/n) log 1/p(X^n)."""
    n = check_block_length(n)
    src = as_source(source)
    f = log_factor(base)
    if mode == "exact":
        if isinstance(src, GaussianSource):
            raise ValidationError("Gaussian sources support sampled mode only")
        blocks = src.support(n, budget)
        logp = src.log_prob(blocks)
        return SpectrumSample(n, (-logp / f) / n, np.exp(logp), "exact", base)
    if mode == "sampled":
        draws = _check_draws(draws)
        blocks = src.draw(n, draws, as_rng(seed))
        logp = src.log_prob(blocks)
        return SpectrumSample(n, (-logp / f) / n, np.full(draws, 1.0 / draws), "sampled", base, draws, seed)
    raise ValidationError(f"unknown mode {mode!r}")


def _unwrap(q):
    if isinstance(q, BlockKernel):
        return q.kernel, q.n
    return q, None


def _dmc_log_q(w, x_blocks, z_blocks):
    with np.errstate(divide="ignore"):
        logw = np.log(w.matrix)
    return logw[x_blocks, z_blocks].sum(axis=1)


def _output_log_marginal(src, w, n, z_blocks, budget):
    """log p_{Z^n}(z) for the law induced by ``src`` through DMC ``w``."""
    if isinstance(src, IIDSource):
        pz = src.p.probs @ w.matrix
        with np.errstate(divide="ignore"):
            return np.log(pz)[z_blocks].sum(axis=1)
    xs = src.support(n, budget)
    px = np.exp(src.log_prob(xs))
    check_budget(len(xs) * len(z_blocks), budget, "input/output block pairs")
    q = np.exp(np.stack([_dmc_log_q(w, np.broadcast_to(x, z_blocks.shape), z_blocks) for x in xs]))
    with np.errstate(divide="ignore"):
        return np.log(px @ q)


def information_spectrum(source, q, n=None, mode="exact", draws=None, seed=None, base=2, budget=DEFAULT_BUDGET):
    """Distribution of (1/n) log Q^n(Z^n|X^n) / p_{Z^n}(Z^n).

    ``q`` is a DMC, a BlockKernel, or a GaussianChannel.  Gaussian
    instances (GaussianSource through GaussianChannel) run in sampled mode
    only.
    """
    kernel, block_n = _unwrap(q)
    n = check_block_length(n if n is not None else block_n)
    if block_n is not None and block_n != n:
        raise ValidationError(f"kernel is for blocks of length {block_n}, not {n}")
    src = as_source(source)
    f = log_factor(base)

    if isinstance(kernel, GaussianChannel):
        if mode != "sampled" or not isinstance(src, GaussianSource):
            raise ValidationError("Gaussian spectra need a GaussianSource and sampled mode")
        rng = as_rng(seed)
        draws = _check_draws(draws)
        x = src.draw(n, draws, rng)
        z = x + rng.normal(0.0, math.sqrt(kernel.variance), size=x.shape)
        out = GaussianSource(src.power + kernel.variance)
        dens = kernel.log_density(z, x) - out.log_prob(z)
        return SpectrumSample(n, (dens / f) / n, np.full(draws, 1.0 / draws), "sampled", base, draws, seed)

    if not isinstance(kernel, DMC):
        raise ValidationError(f"unsupported kernel {type(kernel).__name__}")
    if getattr(src, "letters", kernel.input_alphabet) != kernel.input_alphabet:
        raise ValidationError("source letters and kernel input alphabet differ")
    if mode == "exact":
        xs = src.support(n, budget)
        k_out = kernel.output_size
        check_budget(len(xs) * k_out ** n, budget, "input/output block pairs")
        zs = np.array(list(itertools.product(range(k_out), repeat=n)), dtype=np.int64)
        x_rep = np.repeat(xs, len(zs), axis=0)
        z_rep = np.tile(zs, (len(xs), 1))
        logq = _dmc_log_q(kernel, x_rep, z_rep)
        logpx = np.repeat(src.log_prob(xs), len(zs))
        keep = np.isfinite(logq)
        x_rep, z_rep, logq, logpx = x_rep[keep], z_rep[keep], logq[keep], logpx[keep]
        logpz = _output_log_marginal(src, kernel, n, z_rep, budget)
        return SpectrumSample(n, ((logq - logpz) / f) / n, np.exp(logpx + logq), "exact", base)
    if mode == "sampled":
        rng = as_rng(seed)
        draws = _check_draws(draws)
        x = src.draw(n, draws, rng)
        cdf = np.cumsum(kernel.matrix, axis=1)[x]
        z = np.minimum((rng.random(x.shape)[..., None] >= cdf).sum(axis=-1), kernel.output_size - 1)
        logq = _dmc_log_q(kernel, x, z)
        logpz = _output_log_marginal(src, kernel, n, z, budget)
        return SpectrumSample(n, ((logq - logpz) / f) / n, np.full(draws, 1.0 / draws), "sampled", base, draws, seed)
    raise ValidationError(f"unknown mode {mode!r}")


def outage(spec, r):
    """Pr{(1/n) i <= r} at this block length."""
    return spec.cdf(r)


def outage_curve(spec, grid):
    return [(float(r), outage(spec, r)) for r in grid]


def ks_distance(a, b, decimals=12):
    """Kolmogorov-Smirnov distance between two spectra (atoms merged to ``decimals``)."""
    va, pa = a.merged(decimals)
    vb, pb = b.merged(decimals)
    va, vb = np.round(va, decimals), np.round(vb, decimals)
    grid = np.union1d(va, vb)
    fa = np.concatenate([[0.0], np.cumsum(pa)])[np.searchsorted(va, grid, side="right")]
    fb = np.concatenate([[0.0], np.cumsum(pb)])[np.searchsorted(vb, grid, side="right")]
    return float(np.max(np.abs(fa - fb)))


@dataclass
class InequalityReport:
    quantities: dict
    checks: list

    @property
    def ok(self):
        return all(holds for _, _, _, holds in self.checks)


def spectral_inequality_check(px, w, a=None, n=None, base=2, tol=1e-10):
    """Single-letter versions of the spectral entropy / information bounds
    for the memoryless chain X -> Y -> Z (Y = W(X), Z = A(Y)).

    For i.i.d. inputs through DMCs the spectral rates concentrate on the
    Shannon quantities, so each bound is checked on those.  With ``n`` set,
    the exact block spectra at that length are also checked to have means
    H(X) and I(X;Z).
    """
    px = px if isinstance(px, Distribution) else Distribution(px)
    a = a if a is not None else DMC.identity(w.output_alphabet)
    jxy = JointDistribution.from_channel(px, w)
    py = jxy.marginal_z()
    jyz = JointDistribution.from_channel(py, a)
    jxz = JointDistribution.from_channel(px, w.matrix @ a.matrix)
    hx = entropy(px, base)
    hy = entropy(py, base)
    hy_x = float(sum(px.probs[i] * entropy(Distribution(w.matrix[i]), base) for i in range(w.input_size)))
    ixy = mutual_information(jxy, base)
    iyz = mutual_information(jyz, base)
    ixz = mutual_information(jxz, base)
    q = dict(H_X=hx, H_Y=hy, H_Y_given_X=hy_x, I_XY=ixy, I_YZ=iyz, I_XZ=ixz)
    checks = [
        ("H(Y|X) <= H(Y)", hy_x, hy, hy_x <= hy + tol),
        ("I(X;Y) <= H(Y) - H(Y|X)", ixy, hy - hy_x, ixy <= hy - hy_x + tol),
        ("I(X;Y) >= H(Y) - H(Y|X)", ixy, hy - hy_x, ixy >= hy - hy_x - tol),
        ("I(X;Z) <= I(X;Y)", ixz, ixy, ixz <= ixy + tol),
        ("I(X;Z) <= I(Y;Z)", ixz, iyz, ixz <= iyz + tol),
        ("I(X;Z) <= H(X)", ixz, hx, ixz <= hx + tol),
    ]
    if n is not None:
        es = entropy_spectrum(px, n, base=base)
        q_block = compose_kernels(w, a)
        ins = information_spectrum(px, q_block, n, base=base)
        checks.append(("mean entropy density = H(X)", es.mean(), hx, abs(es.mean() - hx) <= tol))
        checks.append(("mean information density = I(X;Z)", ins.mean(), ixz, abs(ins.mean() - ixz) <= tol))
        q.update(entropy_spectrum_mean=es.mean(), information_spectrum_mean=ins.mean())
    return InequalityReport(q, checks)


