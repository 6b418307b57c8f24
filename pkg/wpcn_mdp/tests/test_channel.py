import math

import numpy as np
import pytest

from wpcn_mdp.channel import bin_gain, equal_probability_bins, sample_bin, sample_fade
from wpcn_mdp.params import ConfigurationError, ContractViolation


def test_single_bin():
    bins = equal_probability_bins(1)
    assert bins.representatives == pytest.approx([1.0], abs=1e-12)
    assert bins.boundaries[0] == 0.0
    assert math.isinf(bins.boundaries[-1])


def test_two_bins():
    bins = equal_probability_bins(2)
    assert bins.boundaries[1] == pytest.approx(math.log(2), rel=1e-12)
    assert bins.representatives == pytest.approx([1 - math.log(2), 1 + math.log(2)], rel=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 16, 64])
def test_representatives_preserve_mean(n):
    bins = equal_probability_bins(n)
    assert bins.representatives.mean() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(bins.representatives) > 0)
    assert np.all(np.diff(bins.boundaries) > 0)


@pytest.mark.parametrize("n", [2, 5, 10])
def test_boundaries_are_quantiles(n):
    bins = equal_probability_bins(n)
    assert bins.cdf(bins.boundaries[:-1]) == pytest.approx(np.arange(n) / n, abs=1e-12)


def test_representative_inside_its_bin():
    bins = equal_probability_bins(6)
    assert np.all(bins.representatives > bins.boundaries[:-1])
    assert np.all(bins.representatives < bins.boundaries[1:])


def test_zero_bins_rejected():
    with pytest.raises(ConfigurationError):
        equal_probability_bins(0)


@pytest.mark.parametrize("n, k, mean_gain, expected", [
    (1, 0, 5e-5, 5e-5),
    (2, 1, 5e-5, 8.466e-5),
    (2, 0, 1.25e-5, 3.836e-6),
])
def test_bin_gain(n, k, mean_gain, expected):
    assert bin_gain(equal_probability_bins(n), k, mean_gain) == pytest.approx(expected, rel=1e-3)


def test_bin_gain_out_of_range():
    with pytest.raises(ContractViolation):
        bin_gain(equal_probability_bins(2), 2, 5e-5)


def test_sample_bin_single():
    assert np.all(sample_bin(np.random.default_rng(3), 1, size=1000) == 0)


def test_sample_bin_uniform():
    draws = sample_bin(np.random.default_rng(11), 4, size=1_000_000)
    frequencies = np.bincount(draws, minlength=4) / len(draws)
    assert frequencies == pytest.approx([0.25] * 4, abs=0.002)


def test_sample_bin_deterministic():
    first = sample_bin(np.random.default_rng(5), 3, size=100)
    second = sample_bin(np.random.default_rng(5), 3, size=100)
    assert np.array_equal(first, second)


def test_bin_index_matches_equal_probability():
    bins = equal_probability_bins(4)
    fades = sample_fade(np.random.default_rng(2), size=400_000)
    frequencies = np.bincount(bins.bin_index(fades), minlength=4) / len(fades)
    assert frequencies == pytest.approx([0.25] * 4, abs=0.005)
    assert bins.bin_index(np.array([0.0, bins.boundaries[1], 1e9])).tolist() == [0, 1, 3]
