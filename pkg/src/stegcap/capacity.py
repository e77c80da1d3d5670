"""Secure capacities: closed forms, finite-n permissible-set rates, and
constrained DMC capacity.

Finite-n rate sequences are summarised by their tail infimum / supremum
over the computed window.  These are estimates of liminf / limsup over that
window only; nothing is extrapolated past the largest n computed.
"""

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .channel import DMC, BlockKernel
from .exceptions import ValidationError
from .prob import Distribution, TypeVector, entropy, nearest_type, type_class_entropy_bounds, type_class_size
from .steganalyzer import MemorylessSteganalyzer, Steganalyzer, TypeClassSteganalyzer, compose, enumerate_permissible
from .validation import DEFAULT_BUDGET, check_block_length, check_budget, check_probability_vector, log_factor, unit_name

TAIL_FRACTION = 0.5
CONVERSE_TOL = 1e-2


@dataclass
class CapacityResult:
    """A capacity value plus whatever finite-n evidence produced it.

    ``value`` is clamped at 0; ``unclamped`` keeps the raw formula value.
    For finite-n methods, ``n_window``/``counts``/``rates`` hold the
    per-n sequence and ``bounds`` optional (low, high) pairs per n.
    """

    value: float
    method: str
    base: object = 2
    unclamped: float = None
    n_window: tuple = ()
    counts: tuple = ()
    rates: tuple = ()
    bounds: tuple = ()
    info: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    @property
    def unit(self):
        return unit_name(self.base)

    def rows(self):
        """(n, count, rate, bound_low, bound_high) per computed block length."""
        bounds = self.bounds or [(None, None)] * len(self.n_window)
        counts = self.counts or [None] * len(self.n_window)
        for n, count, rate, (lo, hi) in zip(self.n_window, counts, self.rates, bounds):
            yield n, count, rate, lo, hi

    def write_csv(self, fh, metadata=None):
        write_rate_csv(fh, self.rows(), self.base, metadata)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rate_csv(fh, rows, base, metadata=None):
    """CSV with header ``n,count,rate_<unit>,bound_low_<unit>,bound_high_<unit>``.

    ``metadata`` items are echoed first as ``# key=value`` lines.
    """
    unit = unit_name(base)
    for k, v in (metadata or {}).items():
        fh.write(f"# {k}={v}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "count", f"rate_{unit}", f"bound_low_{unit}", f"bound_high_{unit}"])
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _window(n_window):
    if isinstance(n_window, int):
        return tuple(range(1, check_block_length(n_window) + 1))
    window = tuple(check_block_length(n) for n in n_window)
    if not window:
        raise ValidationError("empty block-length window")
    return window


def _count_fn(g, budget):
    if isinstance(g, Steganalyzer):
        return lambda n: g.count_permissible(n, budget=budget)
    if callable(g):
        return g
    raise ValidationError(f"expected a steganalyzer or a count function, got {type(g).__name__}")


def _log_count(count, base):
    return -math.inf if count == 0 else math.log(count) / log_factor(base)


def permissible_rates(g, n_window, base=2, budget=DEFAULT_BUDGET):
    """``(window, counts, rates)`` with rate_n = (1/n) log |P_{g_n}|.

    ``g`` is a steganalyzer or a plain callable n -> |P_n|.
    """
    window = _window(n_window)
    count = _count_fn(g, budget)
    counts = tuple(int(count(n)) for n in window)
    rates = tuple(_log_count(c, base) / n for n, c in zip(window, counts))
    return window, counts, rates


def tail(values, fraction=TAIL_FRACTION):
    """The last ``fraction`` of a sequence (at least one element)."""
    k = max(1, math.ceil(len(values) * fraction))
    return values[-k:]


def _tail_inf(rates, fraction):
    return min(tail(rates, fraction))


def _tail_sup(rates, fraction):
    return max(tail(rates, fraction))


def noiseless_secure_capacity(g, n_window, base=2, tail_fraction=TAIL_FRACTION, budget=DEFAULT_BUDGET):
    """Secure capacity of the noiseless channel: liminf (1/n) log |P_{g_n}|.

    The estimate is the infimum of the rates over the last ``tail_fraction``
    of the window.  An empty permissible set anywhere in that tail gives 0.
    """
    window, counts, rates = permissible_rates(g, n_window, base, budget)
    raw = _tail_inf(rates, tail_fraction)
    return CapacityResult(
        value=max(0.0, raw),
        method="finite_n_rate",
        base=base,
        unclamped=raw,
        n_window=window,
        counts=counts,
        rates=rates,
        info={"tail_fraction": tail_fraction, "estimate": "tail infimum"},
    )


def permissible_set_upper_bound(g, n_window, base=2, tail_fraction=TAIL_FRACTION, budget=DEFAULT_BUDGET):
    """Tail supremum of (1/n) log |P_{g_n}|: the limsup upper bound on capacity."""
    _, _, rates = permissible_rates(g, n_window, base, budget)
    return max(0.0, _tail_sup(rates, tail_fraction))


@dataclass
class ConverseProbe:
    verdict: str
    gap: float
    liminf_estimate: float
    limsup_estimate: float
    late_gap: float


def strong_converse_probe(g, n_window, base=2, tol=CONVERSE_TOL, tail_fraction=TAIL_FRACTION, budget=DEFAULT_BUDGET):
    """Compare tail liminf and limsup estimates of (1/n) log |P_{g_n}|.

    ``satisfied``: the tail gap is below ``tol``.  ``violated``: the gap over
    the last quarter of the tail is at least ``tol`` and has not shrunk below
    half the full-tail gap, i.e. the rate keeps oscillating.  Anything else
    is ``inconclusive``.
    """
    _, _, rates = permissible_rates(g, n_window, base, budget)
    tail_rates = tail(rates, tail_fraction)
    lo, hi = min(tail_rates), max(tail_rates)
    gap = hi - lo
    late = tail(tail_rates, 0.25)
    late_gap = max(late) - min(late) if len(late) > 1 else 0.0
    if gap < tol:
        verdict = "satisfied"
    elif len(late) > 1 and late_gap >= tol and late_gap >= 0.5 * gap:
        verdict = "violated"
    else:
        verdict = "inconclusive"
    return ConverseProbe(verdict, gap, lo, hi, late_gap)


def dmsc_noiseless_capacity(g1, base=2):
    """log |P_g| for a memoryless steganalyzer on a noiseless channel.

    Such channels always satisfy the strong converse: the per-n rate is
    constant.
    """
    if not isinstance(g1, MemorylessSteganalyzer):
        raise ValidationError("dmsc_noiseless_capacity needs a memoryless steganalyzer")
    k = len(g1.permissible_letters)
    value = _log_count(k, base)
    return CapacityResult(
        value=max(0.0, value),
        method="closed_form",
        base=base,
        unclamped=value,
        info={"strong_converse": True, "permissible_letters": k},
    )


def awgn_secure_capacity(c, sigma_e2, sigma_a2, base=2):
    """Power-detector capacity with Gaussian encoder and attack noise:
    0.5 log((c + sa2) / (se2 + sa2)), clamped at 0.

    With both noise variances zero the capacity is unbounded and the result
    carries ``value = inf`` and ``info["unbounded"] = True``.
    """
    if not c > 0:
        raise ValidationError(f"power threshold c must be positive, got {c!r}")
    if sigma_e2 < 0 or sigma_a2 < 0:
        raise ValidationError("noise variances must be non-negative")
    if sigma_e2 == 0 and sigma_a2 == 0:
        return CapacityResult(math.inf, "closed_form", base, math.inf, info={"unbounded": True})
    raw = 0.5 * math.log((c + sigma_a2) / (sigma_e2 + sigma_a2)) / log_factor(base)
    return CapacityResult(max(0.0, raw), "closed_form", base, raw, info={"unbounded": False})


def _reference_type_fn(reference_types):
    if isinstance(reference_types, TypeClassSteganalyzer):
        return reference_types.reference_type
    if isinstance(reference_types, Distribution):
        return lambda n: nearest_type(reference_types, n)
    if callable(reference_types):
        return reference_types
    return lambda n: reference_types[n]


def empirical_dist_capacity(reference_types, n_window, p_S=None, base=2, tail_fraction=TAIL_FRACTION):
    """Noiseless capacity of the empirical-distribution steganalyzer.

    The permissible set at length n is the type class of the reference type
    p_n, so rate_n = (1/n) log |T(p_n)|, computed from the exact multinomial.
    ``reference_types`` may be a Distribution p_S (nearest types are used),
    a callable n -> TypeVector, a mapping, or a TypeClassSteganalyzer.  When
    ``p_S`` is known, every p_n must put zero mass where p_S does.
    """
    window = _window(n_window)
    type_of = _reference_type_fn(reference_types)
    if p_S is None and isinstance(reference_types, Distribution):
        p_S = reference_types
    counts, rates, bounds = [], [], []
    for n in window:
        t = type_of(n)
        t = t if isinstance(t, TypeVector) else TypeVector(tuple(t))
        if t.n != n:
            raise ValidationError(f"reference type {t.counts} has length {t.n}, expected {n}")
        if p_S is not None:
            ps = p_S.probs if isinstance(p_S, Distribution) else check_probability_vector(p_S)
            if len(ps) != t.alphabet_size or any(c > 0 and p == 0 for c, p in zip(t.counts, ps)):
                raise ValidationError(f"type {t.counts} is not supported by p_S")
        lower, upper, rate = type_class_entropy_bounds(t, base)
        counts.append(type_class_size(t))
        rates.append(rate)
        bounds.append((lower, upper))
    raw = _tail_inf(rates, tail_fraction)
    info = {"tail_fraction": tail_fraction}
    if p_S is not None:
        info["source_entropy"] = entropy(p_S, base)
    return CapacityResult(
        max(0.0, raw), "finite_n_rate", base, raw, window, tuple(counts), tuple(rates), tuple(bounds), info
    )


def cachin_capacity(p_S, base=2):
    """Capacity under perfect (zero-divergence) security: H(S).

    The empirical-distribution steganalyzer, and the passive, unconstrained
    endpoint of the distortion-constrained formulation, share this value.
    """
    p = p_S if isinstance(p_S, Distribution) else Distribution(p_S)
    h = entropy(p, base)
    return CapacityResult(h, "closed_form", base, h)


moulin_endpoint_capacity = cachin_capacity


class ChannelCapacity(BaseEstimator):
    """Shannon capacity of a DMC by alternating maximization (Blahut-Arimoto).

    Iterates until the gap between the upper bound max_x D(W(.|x) || q) and
    the current mutual information drops below ``tol`` nats.

    Attributes
    ----------
    capacity_ : float
        Capacity in units of ``base``.
    input_distribution_ : ndarray
        The final iterate's input law.
    gap_ : float
        Final upper-minus-lower bound gap, in units of ``base``.
    n_iter_ : int
    """

    def __init__(self, tol=1e-9, max_iter=100_000, base=2):
        self.tol = tol
        self.max_iter = max_iter
        self.base = base

    def fit(self, W, y=None):
        W = np.asarray(getattr(W, "matrix", W), dtype=float)
        k = W.shape[0]
        r = np.full(k, 1.0 / k)
        logW = np.where(W > 0, np.log(np.where(W > 0, W, 1.0)), 0.0)
        for it in range(1, self.max_iter + 1):
            q = r @ W
            logq = np.log(np.where(q > 0, q, 1.0))
            # D(W(.|x) || q) per input letter, 0 log 0 = 0
            d = np.where(W > 0, W * (logW - logq), 0.0).sum(axis=1)
            lower = float(r @ d)
            upper = float(d.max())
            if upper - lower < self.tol:
                break
            r = r * np.exp(d - d.max())
            r /= r.sum()
        f = log_factor(self.base)
        self.capacity_ = max(lower, 0.0) / f
        self.input_distribution_ = r
        self.gap_ = (upper - lower) / f
        self.n_iter_ = it
        return self


def secure_letters(w, g1):
    """Input letters whose whole output support is permissible: W(I_g|x) = 0."""
    allowed = g1.permissible_letters
    cols = np.array([y in allowed for y in w.output_alphabet])
    return [x for i, x in enumerate(w.input_alphabet) if not np.any(w.matrix[i, ~cols] > 0)]


def dmsc_secure_capacity(w, g1, base=2, tol=1e-9):
    """Capacity of a DMC with memoryless steganalyzer, passive adversary,
    detection probability forced to zero.

    Only input letters that are never pushed into the impermissible set may
    carry positive frequency, so the result is the ordinary capacity of the
    sub-channel on those rows (0 when there are none).
    """
    if not isinstance(w, DMC) or not isinstance(g1, MemorylessSteganalyzer):
        raise ValidationError("dmsc_secure_capacity needs a DMC and a memoryless steganalyzer")
    if set(w.output_alphabet) != set(g1.letters):
        raise ValidationError("channel outputs and steganalyzer alphabet differ")
    letters = secure_letters(w, g1)
    if not letters:
        return CapacityResult(0.0, "optimization", base, 0.0, info={"secure_letters": []})
    rows = [w.input_index(x) for x in letters]
    est = ChannelCapacity(tol=tol, base=base).fit(w.matrix[rows])
    px = np.zeros(w.input_size)
    px[rows] = est.input_distribution_
    return CapacityResult(
        est.capacity_,
        "optimization",
        base,
        est.capacity_,
        info={"secure_letters": letters, "input_distribution": px, "iterations": est.n_iter_, "gap": est.gap_},
    )


def detection_trajectory(w, g, px, n_window, budget=DEFAULT_BUDGET):
    """Exact delta_n = sum_x W^n(I_{g_n}|x) p_X^n(x) for an i.i.d. input law.

    Every input block and every output block is enumerated, so the cost is
    |X|^n |Y|^n per n; this is the brute-force oracle behind the secure-input
    membership test.
    """
    px = px.probs if isinstance(px, Distribution) else check_probability_vector(px)
    deltas = []
    for n in _window(n_window):
        check_budget(w.input_size ** n * w.output_size ** n, budget, "input/output block pairs")
        permissible = enumerate_permissible(g, n, budget=budget)
        mask = np.array([y in permissible.members for y in itertools.product(w.output_alphabet, repeat=n)])
        block = BlockKernel(w, n)
        delta = 0.0
        for x in block.input_blocks():
            p = math.prod(px[w.input_index(a)] for a in x)
            if p > 0:
                delta += p * block.row(x, budget)[~mask].sum()
        deltas.append(delta)
    return tuple(deltas)


@dataclass
class SecureInputTest:
    """Finite-n evidence on whether an input family belongs to S_delta."""

    n_window: tuple
    deltas: tuple
    delta: float
    verdict: str


def secure_input_test(w, g, px, n_window, delta=0.0, tol=1e-9, budget=DEFAULT_BUDGET):
    """Membership test for S_delta restricted to i.i.d. input families.

    ``member``: every delta_n in the tail of the window is within ``tol`` of
    ``delta`` or below.  ``not_member``: the tail delta_n exceed ``delta +
    tol`` and do not decrease toward it.  Otherwise ``inconclusive``.
    """
    window = _window(n_window)
    deltas = detection_trajectory(w, g, px, window, budget)
    tail_d = tail(deltas)
    if max(tail_d) <= delta + tol:
        verdict = "member"
    elif min(tail_d) > delta + tol and all(b >= a - tol for a, b in zip(tail_d, tail_d[1:])):
        verdict = "not_member"
    else:
        verdict = "inconclusive"
    return SecureInputTest(window, deltas, delta, verdict)


def output_detection_probability(p_block, g, n):
    """p_{Y^n}(I_{g_n}) for a block law over Y^n listed in lexicographic order.

    Finite-n ingredient of the secure-output family T_delta.
    """
    p_block = check_probability_vector(p_block, atol=1e-9)
    blocks = list(itertools.product(g.letters, repeat=n))
    if len(blocks) != len(p_block):
        raise ValidationError(f"block law has {len(p_block)} entries, expected {len(blocks)}")
    flags = g.predict(np.array(blocks))
    return float(p_block[flags == 1].sum())


@dataclass
class MonotonicityReport:
    n_window: tuple
    included: tuple
    counts_g: tuple
    counts_v: tuple
    counts_composite: tuple
    inclusion_ordered: bool
    composite_ordered: bool
    channel_ordered: bool = None

    @property
    def ok(self):
        return self.inclusion_ordered and self.composite_ordered and self.channel_ordered is not False


def monotonicity_check(g, v, w=None, n_window=8, budget=DEFAULT_BUDGET):
    """Finite-n checks of capacity monotonicity in the permissible sets.

    At each n: if P_{g_n} is a subset of P_{v_n} then |P_{g_n}| <= |P_{v_n}|,
    and the series composite never has more permissible blocks than either
    factor.  With a DMC ``w`` and memoryless ``g``, ``v``, also checks the
    DMC secure capacities are ordered whenever the per-letter sets are.
    """
    window = _window(n_window)
    h = compose(g, v)
    included, cg, cv, ch = [], [], [], []
    for n in window:
        pg = enumerate_permissible(g, n, budget=budget)
        pv = enumerate_permissible(v, n, budget=budget)
        ph = enumerate_permissible(h, n, budget=budget)
        included.append(pg.members <= pv.members)
        cg.append(pg.count)
        cv.append(pv.count)
        ch.append(ph.count)
    inclusion_ordered = all(a <= b for inc, a, b in zip(included, cg, cv) if inc)
    composite_ordered = all(c <= min(a, b) for a, b, c in zip(cg, cv, ch))
    channel_ordered = None
    if w is not None and isinstance(g, MemorylessSteganalyzer) and isinstance(v, MemorylessSteganalyzer):
        if g.permissible_letters <= v.permissible_letters:
            channel_ordered = dmsc_secure_capacity(w, g).value <= dmsc_secure_capacity(w, v).value + 1e-9
    return MonotonicityReport(
        window, tuple(included), tuple(cg), tuple(cv), tuple(ch), inclusion_ordered, composite_ordered, channel_ordered
    )
