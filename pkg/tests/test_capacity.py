import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stegcap.capacity import (
    ChannelCapacity,
    awgn_secure_capacity,
    cachin_capacity,
    detection_trajectory,
    dmsc_noiseless_capacity,
    dmsc_secure_capacity,
    empirical_dist_capacity,
    monotonicity_check,
    noiseless_secure_capacity,
    output_detection_probability,
    permissible_set_upper_bound,
    secure_input_test,
    strong_converse_probe,
)
from stegcap.channel import DMC
from stegcap.exceptions import ValidationError
from stegcap.prob import Distribution, JointDistribution, binary_entropy, entropy, mutual_information
from stegcap.steganalyzer import ExplicitSetSteganalyzer, MemorylessSteganalyzer, SumSteganalyzer


def test_awgn_closed_form_cases():
    assert awgn_secure_capacity(3, 1, 1).value == pytest.approx(0.5, abs=1e-15)
    assert awgn_secure_capacity(3, 1, 0).value == pytest.approx(0.5 * math.log2(3))
    assert awgn_secure_capacity(3, 0, 1).value == pytest.approx(0.5 * math.log2(4))
    both = awgn_secure_capacity(3, 0, 0)
    assert both.value == math.inf and both.info["unbounded"]
    assert awgn_secure_capacity(3, 1, 1, base="e").value == pytest.approx(0.5 * math.log(2))


@given(st.floats(0.01, 100), st.floats(0, 100), st.floats(0, 100))
def test_awgn_clamped_and_monotone(c, se2, sa2):
    if se2 == 0 and sa2 == 0:
        return
    v = awgn_secure_capacity(c, se2, sa2)
    assert v.value >= 0
    if se2 >= c:
        assert v.value == 0
    assert v.value <= awgn_secure_capacity(c * 1.5, se2, sa2).value + 1e-12


def test_awgn_rejects_bad_input():
    with pytest.raises(ValidationError):
        awgn_secure_capacity(0, 1, 1)
    with pytest.raises(ValidationError):
        awgn_secure_capacity(1, -1, 1)


def grid_capacity(w, steps=20001):
    """Brute-force max over p in [0, 1] for a two-input channel."""
    best = 0.0
    for p in np.linspace(0, 1, steps):
        best = max(best, mutual_information(JointDistribution.from_channel([p, 1 - p], w)))
    return best


def test_blahut_arimoto_bsc_closed_form():
    est = ChannelCapacity(tol=1e-12).fit(DMC.bsc(0.11))
    assert est.capacity_ == pytest.approx(1 - binary_entropy(0.11), abs=1e-10)
    np.testing.assert_allclose(est.input_distribution_, [0.5, 0.5], atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_blahut_arimoto_vs_grid(seed):
    w = np.random.default_rng(seed).dirichlet(np.ones(3), size=2)
    est = ChannelCapacity(tol=1e-12).fit(w)
    grid = grid_capacity(w)
    assert grid - 1e-12 <= est.capacity_ <= grid + 1e-6
    assert est.gap_ < 1e-11


def test_dmsc_secure_capacity():
    g = MemorylessSteganalyzer(permissible=(0, 1), alphabet=(0, 1, 2))
    w = DMC([[0.9, 0.1, 0.0], [0.1, 0.9, 0.0], [0.0, 0.5, 0.5]])
    res = dmsc_secure_capacity(w, g)
    assert res.info["secure_letters"] == [0, 1]
    assert res.value == pytest.approx(1 - binary_entropy(0.1), abs=1e-8)
    assert res.info["input_distribution"][2] == 0
    bad = DMC([[0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]])
    assert dmsc_secure_capacity(bad, g).value == 0.0


def test_dmsc_noiseless_capacity():
    g = MemorylessSteganalyzer(permissible=(0, 1, 2), alphabet=range(5))
    assert dmsc_noiseless_capacity(g).value == pytest.approx(math.log2(3))
    assert noiseless_secure_capacity(g, 6).value == pytest.approx(math.log2(3))


def test_sum_noiseless_rates():
    res = noiseless_secure_capacity(SumSteganalyzer(), [999])
    assert res.rates[0] == pytest.approx(998 / 999, abs=1e-12)
    assert res.value == pytest.approx(998 / 999, abs=1e-12)
    assert permissible_set_upper_bound(SumSteganalyzer(), range(900, 1001)) > res.value - 0.01
    assert strong_converse_probe(SumSteganalyzer(), 1000).verdict == "satisfied"


def test_converse_probe_flags_oscillation():
    sets = {n: [(0,) * n] if n % 2 else [tuple(int(b) for b in np.binary_repr(i, n)) for i in range(2**n)] for n in range(1, 13)}
    g = ExplicitSetSteganalyzer(sets)
    probe = strong_converse_probe(g, 12)
    assert probe.verdict == "violated"
    assert probe.liminf_estimate == 0 and probe.limsup_estimate == pytest.approx(1.0)


def test_empty_permissible_set_gives_zero():
    res = noiseless_secure_capacity(ExplicitSetSteganalyzer({}), 4)
    assert res.value == 0.0 and set(res.counts) == {0}


def test_rate_csv_has_units_and_metadata():
    buf = io.StringIO()
    noiseless_secure_capacity(SumSteganalyzer(), 4).write_csv(buf, {"variant": "sum"})
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# variant=sum"
    assert lines[1] == "n,count,rate_bits,bound_low_bits,bound_high_bits"
    assert lines[5].startswith("4,11,")


def test_empirical_distribution_sandwich_and_limit():
    p = Distribution([0.5, 0.3, 0.2])
    res = empirical_dist_capacity(p, [10, 100, 1000, 2000])
    for rate, (lo, hi) in zip(res.rates, res.bounds):
        assert lo <= rate <= hi
    assert abs(res.rates[-1] - entropy(p)) < 0.02
    assert cachin_capacity(p).value == pytest.approx(entropy(p))
    with pytest.raises(ValidationError):
        empirical_dist_capacity(lambda n: (n - 1, 1), [4], p_S=[1.0, 0.0])


def test_secure_input_membership():
    g = MemorylessSteganalyzer(permissible=(0, 1), alphabet=(0, 1, 2))
    w = DMC([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.2, 0.8]])
    assert secure_input_test(w, g, [0.5, 0.5, 0.0], 5).verdict == "member"
    res = secure_input_test(w, g, [0.4, 0.4, 0.2], 5)
    assert res.verdict == "not_member"
    for n, d in zip(res.n_window, res.deltas):
        assert d == pytest.approx(1 - (1 - 0.2 * 0.8) ** n, abs=1e-12)
    assert detection_trajectory(w, g, [0.5, 0.5, 0.0], [3]) == (0.0,)


def test_output_detection_probability():
    p = np.full(8, 1 / 8)
    assert output_detection_probability(p, SumSteganalyzer(), 3) == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(5))
def test_monotonicity_random_memoryless(seed):
    rng = np.random.default_rng(seed)
    k = 4
    big = set(rng.choice(k, size=3, replace=False).tolist())
    small = set(list(big)[:2])
    g = MemorylessSteganalyzer(tuple(sorted(small)), tuple(range(k)))
    v = MemorylessSteganalyzer(tuple(sorted(big)), tuple(range(k)))
    w = DMC(rng.dirichlet(np.ones(k), size=3), output_alphabet=tuple(range(k)))
    rep = monotonicity_check(g, v, w, 4)
    assert rep.ok and all(rep.included)
