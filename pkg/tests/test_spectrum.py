import io
import math

import numpy as np
import pytest

from stegcap.channel import DMC, BlockKernel, GaussianChannel
from stegcap.exceptions import ValidationError
from stegcap.prob import JointDistribution, binary_entropy, mutual_information
from stegcap.spectrum import (
    BlockSource,
    GaussianSource,
    IIDSource,
    UniformSource,
    entropy_spectrum,
    information_spectrum,
    ks_distance,
    outage,
    outage_curve,
    spectral_inequality_check,
)
from stegcap.steganalyzer import SumSteganalyzer, enumerate_permissible


def test_information_spectrum_mean_bsc():
    spec = information_spectrum([0.5, 0.5], BlockKernel(DMC.bsc(0.1), 8))
    assert spec.mean() == pytest.approx(1 - binary_entropy(0.1), abs=1e-12)
    assert spec.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_information_spectrum_atoms_by_hand():
    # BSC(p), uniform input, n=2: i/n = 1 + (k log p + (2-k) log(1-p)) / 2 with k flips
    p = 0.2
    spec = information_spectrum([0.5, 0.5], DMC.bsc(p), 2)
    values, weights = spec.merged()
    expect = {1 + (k * math.log2(p) + (2 - k) * math.log2(1 - p)) / 2: math.comb(2, k) * p**k * (1 - p) ** (2 - k) for k in range(3)}
    got = dict(zip(np.round(values, 12), weights))
    for v, w in expect.items():
        assert got[round(v, 12)] == pytest.approx(w, abs=1e-14)


@pytest.mark.parametrize("seed", range(4))
def test_information_spectrum_mean_random_dmc(seed):
    rng = np.random.default_rng(seed)
    px = rng.dirichlet(np.ones(3))
    w = DMC(rng.dirichlet(np.ones(2), size=3))
    spec = information_spectrum(px, w, 4)
    mi = mutual_information(JointDistribution.from_channel(px, w.matrix))
    assert spec.mean() == pytest.approx(mi, abs=1e-10)


def test_block_source_spectrum_mean_is_block_mi_over_n():
    rng = np.random.default_rng(9)
    n = 3
    probs = rng.dirichlet(np.ones(8))
    w = DMC.bsc(0.15)
    src = BlockSource(probs, (0, 1), n)
    spec = information_spectrum(src, w, n)
    block = BlockKernel(w, n).materialize()
    joint = JointDistribution.from_channel(probs, block)
    assert spec.mean() == pytest.approx(mutual_information(joint) / n, abs=1e-10)


def test_sampled_spectrum_converges_to_exact():
    q = BlockKernel(DMC.bsc(0.1), 6)
    exact = information_spectrum([0.5, 0.5], q)
    sampled = information_spectrum([0.5, 0.5], q, mode="sampled", draws=200_000, seed=4)
    assert ks_distance(exact, sampled) < 0.01
    again = information_spectrum([0.5, 0.5], q, mode="sampled", draws=200_000, seed=4)
    np.testing.assert_array_equal(sampled.values, again.values)


def test_entropy_spectrum_mean_and_uniform_point_mass():
    es = entropy_spectrum([0.3, 0.7], 10)
    assert es.mean() == pytest.approx(binary_entropy(0.3), abs=1e-12)
    members = enumerate_permissible(SumSteganalyzer(), 6).sorted_members()
    us = entropy_spectrum(UniformSource(members, (0, 1)), 6)
    values, weights = us.merged()
    assert len(values) == 1 and weights[0] == pytest.approx(1.0)
    assert values[0] == math.log2(42) / 6


def test_gaussian_spectrum_sampled_mean():
    spec = information_spectrum(GaussianSource(3.0), GaussianChannel(1.0), 16, mode="sampled", draws=40_000, seed=2)
    assert spec.mean() == pytest.approx(0.5 * math.log2(4.0), abs=0.02)
    with pytest.raises(ValidationError):
        information_spectrum(GaussianSource(3.0), GaussianChannel(1.0), 16)


def test_outage_is_cdf():
    spec = information_spectrum([0.5, 0.5], DMC.bsc(0.2), 2)
    curve = outage_curve(spec, np.linspace(-2, 2, 41))
    ys = [y for _, y in curve]
    assert ys == sorted(ys) and ys[0] == 0.0 and ys[-1] == pytest.approx(1.0)
    assert outage(spec, spec.values.max()) == pytest.approx(1.0)


def test_ks_distance_identity_and_disjoint():
    a = entropy_spectrum([0.5, 0.5], 3)
    assert ks_distance(a, a) == 0.0
    b = entropy_spectrum([1.0, 0.0], 3)
    assert ks_distance(a, b) == pytest.approx(1.0)


def test_spectrum_csv_header():
    buf = io.StringIO()
    entropy_spectrum([0.5, 0.5], 2, base="e").write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "value_nats,probability"


def test_inequality_check_random_chains():
    rng = np.random.default_rng(1)
    for _ in range(10):
        px = rng.dirichlet(np.ones(3))
        w = DMC(rng.dirichlet(np.ones(3), size=3))
        a = DMC(rng.dirichlet(np.ones(2), size=3))
        assert spectral_inequality_check(px, w, a, n=3).ok


def test_alphabet_mismatch_rejected():
    with pytest.raises(ValidationError):
        information_spectrum(IIDSource([0.5, 0.5], (-1, 1)), DMC.bsc(0.1), 2)
