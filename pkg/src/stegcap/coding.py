"""Codes, exact and Monte Carlo error/detection probabilities, Feinstein's
greedy construction, and the Gaussian random-coding experiment.

Exact evaluation enumerates every output block of the lazy block kernel.
Monte Carlo evaluation draws messages uniformly and reports a 95%
half-width alongside each estimate.
"""

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .capacity import awgn_secure_capacity
from .channel import DMC, BlockKernel, as_rng, negation_attack
from .exceptions import BudgetExceededError, DomainError, ValidationError
from .spectrum import BlockSource, IIDSource
from .steganalyzer import MeanSignSteganalyzer, VarianceSteganalyzer, compose, enumerate_permissible
from .validation import DEFAULT_BUDGET, check_block_length, check_budget

Z95 = 1.959963984540054
DEFAULT_MARGIN = 0.15
EXPLICIT_CODEBOOK_LIMIT = 1 << 16


@dataclass
class Code:
    """An (n, M) code with a decoding rule.

    ``decoder`` is ``"ml"`` (ties to the lowest codeword index),
    ``"min_distance"`` (Hamming on finite alphabets, Euclidean on reals), or
    a dict mapping every output block to a codeword index.
    """

    codewords: list
    decoder: object = "ml"

    def __post_init__(self):
        self.codewords = [tuple(u) for u in self.codewords]
        if not self.codewords:
            raise ValidationError("a code needs at least one codeword")
        if len(set(self.codewords)) != len(self.codewords):
            raise ValidationError("codewords must be distinct")
        if len({len(u) for u in self.codewords}) != 1:
            raise ValidationError("codewords must share one block length")
        if isinstance(self.decoder, dict):
            bad = [i for i in self.decoder.values() if not 0 <= i < self.M]
            if bad:
                raise ValidationError(f"decoding regions point at missing codewords {bad[:3]}")
        elif self.decoder not in ("ml", "min_distance"):
            raise ValidationError(f"unknown decoder {self.decoder!r}")

    @property
    def n(self):
        return len(self.codewords[0])

    @property
    def M(self):
        return len(self.codewords)

    def rate(self, base=2):
        return math.log(self.M) / math.log(base) / self.n if base != "e" else math.log(self.M) / self.n


@dataclass
class MCEstimate:
    value: float
    std_error: float
    draws: int

    @property
    def half_width(self):
        return Z95 * self.std_error

    def __float__(self):
        return float(self.value)


@dataclass
class SimResult:
    epsilon: float
    delta: float
    mode: str
    draws: int = None
    seed: object = None
    epsilon_half_width: float = 0.0
    delta_half_width: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def ci_half_width(self):
        return max(self.epsilon_half_width, self.delta_half_width)


def _finite_kernel(q, n):
    if q is None:
        return None
    if isinstance(q, BlockKernel):
        if q.n != n:
            raise ValidationError(f"kernel block length {q.n} != code length {n}")
        return q.kernel
    if isinstance(q, DMC):
        return q
    raise ValidationError(f"exact evaluation needs a finite kernel, got {type(q).__name__}")


def _output_index(kernel, blocks):
    idx = np.array([[kernel.output_index(a) for a in z] for z in blocks], dtype=np.int64)
    return idx


def _codeword_rows(code, kernel, budget):
    block = BlockKernel(kernel, code.n)
    check_budget(code.M * kernel.output_size ** code.n, budget, "codeword x output-block entries")
    return block.rows(code.codewords, budget)


def _decisions(code, kernel, rows):
    """Decoded index for every output block (lexicographic order)."""
    if isinstance(code.decoder, dict):
        outs = list(itertools.product(kernel.output_alphabet, repeat=code.n))
        missing = [z for z in outs if z not in code.decoder]
        if missing:
            raise ValidationError(f"decoding regions do not cover {missing[0]!r}")
        return np.array([code.decoder[z] for z in outs])
    if code.decoder == "ml":
        return np.argmax(rows, axis=0)
    outs = np.array(list(itertools.product(kernel.output_alphabet, repeat=code.n)))
    cw = np.array(code.codewords)
    dist = (outs[None, :, :] != cw[:, None, :]).sum(axis=2)
    return np.argmin(dist, axis=0)


def _mc(hits, draws):
    p = hits.mean()
    return MCEstimate(float(p), float(math.sqrt(p * (1 - p) / draws)), draws)


def _sample_letters(kernel, x_idx, rng):
    cdf = np.cumsum(kernel.matrix, axis=1)[x_idx]
    return np.minimum((rng.random(x_idx.shape)[..., None] >= cdf).sum(axis=-1), kernel.output_size - 1)


def _input_index(kernel, code):
    return np.array([[kernel.input_index(a) for a in u] for u in code.codewords], dtype=np.int64)


def error_probability(code, q, mode="exact", draws=None, seed=None, budget=DEFAULT_BUDGET):
    """Average decoding error (1/M) sum_i Q^n(D_i^c | u_i).

    ``q`` is the end-to-end kernel (DMC or BlockKernel; ``None`` means
    noiseless).  Exact mode returns a float, Monte Carlo an MCEstimate.
    """
    kernel = _finite_kernel(q, code.n)
    if kernel is None:
        kernel = DMC.identity(sorted(set(itertools.chain.from_iterable(code.codewords))))
    if mode == "exact":
        if code.M == 1:
            return 0.0
        rows = _codeword_rows(code, kernel, budget)
        dec = _decisions(code, kernel, rows)
        correct = sum(rows[i, dec == i].sum() for i in range(code.M))
        return float(max(0.0, 1.0 - correct / code.M))
    if mode == "monte_carlo":
        rng = as_rng(seed)
        draws = int(draws)
        msgs = rng.integers(code.M, size=draws)
        x_idx = _input_index(kernel, code)[msgs]
        z_idx = _sample_letters(kernel, x_idx, rng)
        if code.M == 1:
            return MCEstimate(0.0, 0.0, draws)
        cw = _input_index(kernel, code)
        if code.decoder == "ml":
            with np.errstate(divide="ignore"):
                logw = np.log(kernel.matrix)
            score = np.stack([logw[cw[j], z_idx].sum(axis=1) for j in range(code.M)], axis=1)
            dec = np.argmax(score, axis=1)
        elif code.decoder == "min_distance":
            out_letters = np.array(kernel.output_alphabet)[z_idx]
            cw_letters = np.array(code.codewords)
            dist = np.stack([(out_letters != cw_letters[j]).sum(axis=1) for j in range(code.M)], axis=1)
            dec = np.argmin(dist, axis=1)
        else:
            letters = kernel.output_alphabet
            dec = np.array([code.decoder[tuple(letters[j] for j in z)] for z in z_idx])
        return _mc(dec != msgs, draws)
    raise ValidationError(f"unknown mode {mode!r}")


def detection_probability(code, w, g, mode="exact", draws=None, seed=None, budget=DEFAULT_BUDGET):
    """Average detection probability (1/M) sum_i W^n(I_{g_n} | u_i).

    ``w`` is the encoder-noise kernel (``None`` for noiseless).
    """
    n = code.n
    kernel = _finite_kernel(w, n)
    if mode == "exact":
        if kernel is None:
            return float(np.mean(g.predict(np.array(code.codewords))))
        rows = _codeword_rows(code, kernel, budget)
        outs = np.array(list(itertools.product(kernel.output_alphabet, repeat=n)))
        flagged = g.predict(outs) == 1
        return float(rows[:, flagged].sum(axis=1).mean())
    if mode == "monte_carlo":
        rng = as_rng(seed)
        draws = int(draws)
        msgs = rng.integers(code.M, size=draws)
        if kernel is None:
            y = np.array(code.codewords)[msgs]
        else:
            z_idx = _sample_letters(kernel, _input_index(kernel, code)[msgs], rng)
            y = np.array(kernel.output_alphabet)[z_idx]
        return _mc(g.predict(y) == 1, draws)
    raise ValidationError(f"unknown mode {mode!r}")


def evaluate_code(code, w, g, a=None, mode="exact", draws=None, seed=None, budget=DEFAULT_BUDGET):
    """(epsilon, delta) of ``code`` on the stego-channel (w, g, a)."""
    from .channel import compose_kernels

    q = compose_kernels(w, a)
    if mode == "exact":
        return SimResult(error_probability(code, q, budget=budget), detection_probability(code, w, g, budget=budget), "exact")
    ss = np.random.SeedSequence(seed)
    s_eps, s_del = ss.spawn(2)
    eps = error_probability(code, q, "monte_carlo", draws, np.random.default_rng(s_eps), budget)
    dl = detection_probability(code, w, g, "monte_carlo", draws, np.random.default_rng(s_del), budget)
    return SimResult(eps.value, dl.value, "monte_carlo", draws, seed, eps.half_width, dl.half_width,
                     info={"epsilon_std_error": eps.std_error, "delta_std_error": dl.std_error})


@dataclass
class FeinsteinResult:
    """Outcome of the greedy construction and the bound it is measured against."""

    code: Code
    epsilon: float
    max_epsilon: float
    bound: float
    outage_term: float
    exp_term: float
    target_M: int
    reached: bool
    message: str = ""

    @property
    def within_bound(self):
        return self.epsilon <= self.bound


def feinstein_code(q, source, gamma, target_M, n=None, budget=DEFAULT_BUDGET):
    """Greedy Feinstein code for target size ``target_M`` and slack ``gamma``.

    ``gamma`` is in nats per letter.  With threshold
    log M + n*gamma on the information density i(x; z), the bound is

        Pr{ i(X^n; Z^n) <= log M + n*gamma } + exp(-n*gamma).

    Candidates are scanned in decreasing input probability (ties by
    lexicographic order).  A candidate is admitted when the part of its
    threshold region not yet claimed by earlier codewords has conditional
    mass at least 1 - bound; that part becomes its decoding region.  Blocks
    no codeword claims are decoded to codeword 0.
    """
    kernel = q.kernel if isinstance(q, BlockKernel) else q
    n = check_block_length(n if n is not None else q.n)
    if not isinstance(kernel, DMC):
        raise ValidationError("feinstein_code needs a finite kernel")
    src = source if isinstance(source, (IIDSource, BlockSource)) else IIDSource(source, kernel.input_alphabet)
    if tuple(src.letters) != kernel.input_alphabet:
        raise ValidationError("source letters differ from the kernel input alphabet")
    if not gamma > 0:
        raise ValidationError("gamma must be positive")
    target_M = int(target_M)
    if target_M < 1:
        raise ValidationError("target_M must be at least 1")

    xs = src.support(n, budget)
    px = np.exp(src.log_prob(xs))
    k_out = kernel.output_size
    check_budget(len(xs) * k_out ** n, budget, "input/output block pairs")
    rows = np.array([_block_row(kernel, x) for x in xs])
    pz = px @ rows
    with np.errstate(divide="ignore"):
        dens = np.log(rows) - np.log(pz)[None, :]
    threshold = math.log(target_M) + n * gamma
    above = dens > threshold
    outage_term = float((px[:, None] * rows)[~above].sum())
    exp_term = math.exp(-n * gamma)
    bound = outage_term + exp_term

    order = np.argsort(-px, kind="stable")
    claimed = np.zeros(k_out ** n, dtype=bool)
    chosen, regions = [], []
    for j in order:
        if len(chosen) == target_M:
            break
        region = above[j] & ~claimed
        if rows[j, region].sum() >= 1.0 - bound:
            chosen.append(j)
            regions.append(region)
            claimed |= region

    letters = kernel.input_alphabet
    codewords = [tuple(letters[a] for a in xs[j]) for j in chosen]
    reached = len(chosen) == target_M
    if target_M > len(xs):
        message = f"target M={target_M} exceeds the {len(xs)} candidate input blocks"
    elif not reached:
        message = f"stopped at M={len(chosen)} of {target_M}"
    else:
        message = ""
    if not chosen:
        return FeinsteinResult(None, 1.0, 1.0, bound, outage_term, exp_term, target_M, False, message or "no codeword admitted")

    dec = np.zeros(k_out ** n, dtype=np.int64)
    for i, region in enumerate(regions):
        dec[region] = i
    outs = list(itertools.product(kernel.output_alphabet, repeat=n))
    code = Code(codewords, decoder={z: int(d) for z, d in zip(outs, dec)})
    per_word = np.array([1.0 - rows[j, dec == i].sum() for i, j in enumerate(chosen)])
    eps = error_probability(code, BlockKernel(kernel, n), budget=budget)
    return FeinsteinResult(code, eps, float(per_word.max()), bound, outage_term, exp_term, target_M, reached, message)


def _block_row(kernel, x_idx):
    row = kernel.matrix[x_idx[0]]
    for a in x_idx[1:]:
        row = np.kron(row, kernel.matrix[a])
    return row


def _noise_draw(rng, variance, shape):
    if variance == 0:
        return np.zeros(shape)
    return rng.normal(0.0, math.sqrt(variance), size=shape)


def awgn_experiment(c, sigma_e2, sigma_a2, rate, n, draws, seed, margin=DEFAULT_MARGIN, input_power=None,
                    explicit_limit=EXPLICIT_CODEBOOK_LIMIT, chunk=256):
    """Random Gaussian coding against the power steganalyzer.

    M = ceil(2^(n * rate)) codewords with i.i.d. N(0, p_in) letters, where
    p_in = c - sigma_e2 - margin * c unless ``input_power`` is given.  Each
    trial sends a uniformly chosen codeword: encoder noise gives y, which
    the power detector (threshold c) inspects; attack noise gives z, which
    is decoded to the nearest codeword.

    Up to ``explicit_limit`` codewords the codebook is drawn once and
    decoded against directly.  Beyond that the codebook is never built: for
    each trial, the other M - 1 codewords are independent of (u, z), so the
    conditional error probability is 1 - (1 - p)^(M-1) with
    p = Pr{|z - U'|^2 <= |z - u|^2}, a noncentral chi-square CDF.  The
    trial contributes that probability (a Rao-Blackwellised estimate of the
    same ensemble error).
    """
    if not rate > 0:
        raise ValidationError("rate must be positive")
    n = check_block_length(n)
    draws = int(draws)
    p_in = c - sigma_e2 - margin * c if input_power is None else float(input_power)
    if not p_in > 0:
        raise DomainError(f"input power {p_in!r} is not positive; no margin leaves room under c={c}")
    log2_m = n * rate
    if log2_m > 1000:
        raise BudgetExceededError(
            f"M = 2^{log2_m:.0f} codewords is beyond floating range; use a smaller n * rate"
        )
    M = math.ceil(2.0 ** log2_m)
    rng = as_rng(seed)
    detector = VarianceSteganalyzer(c=c)
    noise = sigma_e2 + sigma_a2

    explicit = M <= explicit_limit
    if explicit:
        codebook = rng.normal(0.0, math.sqrt(p_in), size=(M, n))
        norms = (codebook * codebook).sum(axis=1)
    err = np.empty(draws)
    det = np.empty(draws)
    for start in range(0, draws, chunk):
        k = min(chunk, draws - start)
        if explicit:
            msgs = rng.integers(M, size=k)
            u = codebook[msgs]
        else:
            u = rng.normal(0.0, math.sqrt(p_in), size=(k, n))
        y = u + _noise_draw(rng, sigma_e2, (k, n))
        z = y + _noise_draw(rng, sigma_a2, (k, n))
        det[start:start + k] = detector.predict(y)
        if M == 1:
            err[start:start + k] = 0.0
        elif explicit:
            dist = norms[None, :] - 2.0 * z @ codebook.T
            err[start:start + k] = np.argmin(dist, axis=1) != msgs
        else:
            d2 = ((z - u) ** 2).sum(axis=1)
            nc = (z * z).sum(axis=1) / p_in
            log_p = stats.ncx2.logcdf(d2 / p_in, n, nc)
            err[start:start + k] = _union_error(log_p, M)
    eps = _mc(err, draws)
    dl = _mc(det, draws)
    if not explicit:
        eps = MCEstimate(eps.value, float(err.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0, draws)
    cap = awgn_secure_capacity(c, sigma_e2, sigma_a2)
    penalty = 0.5 * math.log2((p_in + noise) / (c + sigma_a2)) if noise > 0 else 0.0
    info = {
        "M": M,
        "log2_M": math.log2(M),
        "input_power": p_in,
        "margin": margin if input_power is None else None,
        "capacity_bits": cap.value,
        "rate_penalty_bits": penalty,
        "codebook": "explicit" if explicit else "virtual",
        "epsilon_std_error": eps.std_error,
        "delta_std_error": dl.std_error,
    }
    return SimResult(eps.value, dl.value, "monte_carlo", draws, seed, eps.half_width, dl.half_width, info)


def _union_error(log_p, M):
    """1 - (1 - p)^(M - 1), evaluated stably from log p."""
    p = np.exp(log_p)
    small = log_p < -18.0
    log_m1 = math.log(M - 1)
    expo = np.where(small, -np.exp(np.minimum(log_m1 + log_p, 700.0)), (M - 1) * np.log1p(-np.minimum(p, 1.0 - 1e-300)))
    return -np.expm1(expo)


def write_sim_csv(fh, rows, metadata=None):
    """CSV columns n, rate, epsilon, delta, ci_half_width (rates in bits)."""
    for k, v in (metadata or {}).items():
        fh.write(f"# {k}={v}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "rate_bits", "epsilon", "delta", "ci_half_width"])
    for n, rate, res in rows:
        w.writerow([n, repr(float(rate)), repr(res.epsilon), repr(res.delta), repr(res.ci_half_width)])


@dataclass
class SpherePacking:
    log_count: float
    rate: float
    base: object = 2


def sphere_packing_count(c, sigma2, n, base=2):
    """Volume-ratio heuristic: (c / sigma2)^(n/2) noise spheres fit in the
    permissible ball, i.e. log M = (n/2) log(c / sigma2).  Rate 0 if c <= sigma2.
    """
    from .validation import log_factor

    n = check_block_length(n)
    if not sigma2 > 0 or not c > 0:
        raise ValidationError("c and sigma2 must be positive")
    if c <= sigma2:
        return SpherePacking(0.0, 0.0, base)
    per_letter = 0.5 * math.log(c / sigma2) / log_factor(base)
    return SpherePacking(n * per_letter, per_letter, base)


@dataclass
class TwoNoiseReport:
    n: int
    composite_permissible: int
    best_series_delta: float
    M: int
    rate_bits: float
    epsilon: float
    delta: float
    code: Code = field(repr=False, default=None)


def two_noise_demo(n):
    """Series detectors with and without a deterministic negation between them.

    Over {-1, +1}: the first detector fires on negative sums, the second on
    positive sums.  In series they leave no permissible block of odd length,
    so every code is detected with probability 1.  With the second detector
    looking at the negated signal, all 2^(n-1) positive-sum words pass both
    with delta = 0 and decode without error.
    """
    n = check_block_length(n)
    if n % 2 == 0:
        raise ValidationError("two-noise demo needs odd n (even n admits zero-sum blocks)")
    letters = (-1, 1)
    g = MeanSignSteganalyzer("negative", letters)
    v = MeanSignSteganalyzer("positive", letters)
    series = enumerate_permissible(compose(g, v), n)
    # every block is impermissible to the series pair, so any code has delta_n = 1
    best_series_delta = 1.0 if series.count == 0 else 0.0

    flip = negation_attack(letters)
    words = [u for u in itertools.product(letters, repeat=n) if sum(u) > 0]
    code = Code(words, decoder="ml")
    block = BlockKernel(flip, n)
    eps = error_probability(code, block)
    # detection: first detector sees u, second sees the negated block
    rows = block.rows(code.codewords)
    outs = np.array(list(itertools.product(flip.output_alphabet, repeat=n)))
    v_flags = v.predict(outs) == 1
    g_flags = g.predict(np.array(code.codewords)) == 1
    per_word = 1.0 - (~g_flags) * (1.0 - rows[:, v_flags].sum(axis=1))
    delta = float(per_word.mean())
    return TwoNoiseReport(n, series.count, best_series_delta, code.M, math.log2(code.M) / n, eps, delta, code)
