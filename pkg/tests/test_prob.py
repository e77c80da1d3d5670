import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stegcap.exceptions import DomainError, ValidationError
from stegcap.prob import (
    Distribution,
    JointDistribution,
    TypeVector,
    binary_entropy,
    entropy,
    information_density,
    iter_types,
    kl_divergence,
    mutual_information,
    nearest_type,
    stirling_slack,
    type_class_entropy_bounds,
    type_class_size,
)

prob_vectors = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6).filter(lambda v: sum(v) > 1e-3).map(
    lambda v: np.array(v) / sum(v)
)


def naive_entropy(p, base=2.0):
    return -sum(x * math.log(x, base) for x in p if x > 0)


def test_entropy_known_values():
    assert entropy(Distribution.uniform(8)) == pytest.approx(3.0, abs=1e-15)
    assert entropy(Distribution.point_mass(4, 2)) == 0.0
    assert entropy([0.5, 0.5], base="e") == pytest.approx(math.log(2))
    assert binary_entropy(0.11) == pytest.approx(naive_entropy([0.11, 0.89]))
    assert binary_entropy(0.0) == 0.0


@given(prob_vectors)
def test_entropy_matches_direct_sum_and_bounds(p):
    h = entropy(p)
    assert h == pytest.approx(naive_entropy(p), abs=1e-12)
    assert -1e-12 <= h <= math.log2(len(p)) + 1e-12


def test_distribution_rejects_bad_vectors():
    for bad in ([0.5, 0.6], [-0.1, 1.1], [], [[0.5, 0.5]], [float("nan"), 1.0]):
        with pytest.raises(ValidationError):
            Distribution(bad)


@given(prob_vectors, st.integers(1, 4), st.integers(0, 10**6))
def test_mutual_information_identity(px, k_out, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(k_out), size=len(px))
    joint = JointDistribution.from_channel(px, w)
    pz = px @ w
    direct = naive_entropy(px) + naive_entropy(pz) - naive_entropy(joint.probs.ravel())
    mi = mutual_information(joint)
    assert mi == pytest.approx(direct, abs=1e-10)
    assert mi >= -1e-12
    assert mi <= min(naive_entropy(px), naive_entropy(pz)) + 1e-10


def test_mutual_information_bsc():
    joint = JointDistribution.from_channel([0.5, 0.5], [[0.9, 0.1], [0.1, 0.9]])
    assert mutual_information(joint) == pytest.approx(1 - binary_entropy(0.1), abs=1e-14)


@given(prob_vectors, st.integers(0, 10**6))
def test_kl_nonnegative_and_zero_on_self(p, seed):
    q = np.random.default_rng(seed).dirichlet(np.ones(len(p)))
    assert kl_divergence(p, q) >= -1e-12
    assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-12)


def test_kl_infinite_off_support():
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf


def test_information_density_averages_to_mutual_information():
    joint = JointDistribution.from_channel([0.3, 0.7], [[0.8, 0.2, 0.0], [0.1, 0.6, 0.3]])
    avg = sum(
        joint.probs[x, z] * information_density(joint, x, z)
        for x in range(2)
        for z in range(3)
        if joint.probs[x, z] > 0
    )
    assert avg == pytest.approx(mutual_information(joint), abs=1e-13)
    assert information_density(joint, 0, 2) == -math.inf


def test_information_density_domain_errors():
    joint = JointDistribution.from_channel([1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(DomainError):
        information_density(joint, 0, 1)
    with pytest.raises(DomainError):
        information_density(joint, 1, 0)


@pytest.mark.parametrize("n,k", [(1, 2), (4, 2), (5, 3), (6, 3), (4, 4)])
def test_type_class_sizes_match_brute_force(n, k):
    counted = Counter(tuple(Counter(y).get(a, 0) for a in range(k)) for y in itertools.product(range(k), repeat=n))
    types = list(iter_types(n, k))
    assert len(types) == math.comb(n + k - 1, k - 1) == len(counted)
    for t in types:
        assert type_class_size(t) == counted[t.counts]
    assert sum(type_class_size(t) for t in types) == k**n


def test_type_vector_of_block():
    t = TypeVector.of((0, 2, 2, 1, 2), 3)
    assert t.counts == (1, 1, 3)
    assert t.n == 5 and t.support_size == 3
    np.testing.assert_allclose(t.as_distribution().probs, [0.2, 0.2, 0.6])


@given(st.lists(st.integers(0, 40), min_size=1, max_size=5).filter(lambda c: sum(c) > 0))
def test_type_class_rate_sandwich(counts):
    t = TypeVector(tuple(counts))
    lower, upper, value = type_class_entropy_bounds(t)
    assert lower - 1e-12 <= value <= upper
    assert upper == pytest.approx(naive_entropy(np.array(counts) / sum(counts)), abs=1e-12)
    assert upper - lower == pytest.approx(stirling_slack(t.n, t.support_size))


def test_stirling_slack_formula():
    n, s = 100, 3
    assert stirling_slack(n, s) == pytest.approx(s / n * math.log2(math.sqrt(2 * math.pi * n) * math.exp(0.5)))


@given(prob_vectors, st.integers(1, 500))
def test_nearest_type_sums_to_n_and_stays_close(p, n):
    t = nearest_type(p, n)
    counts = np.array(t.counts)
    assert counts.sum() == n
    assert np.all(np.abs(counts - n * p) < 1.0 + 1e-9)
    assert not np.any((counts > 0) & (p == 0))


def test_nearest_type_reference_source():
    assert nearest_type([0.5, 0.3, 0.2], 10).counts == (5, 3, 2)
    assert nearest_type([0.5, 0.3, 0.2], 1000).counts == (500, 300, 200)
