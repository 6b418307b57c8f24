'''
Quasi-static Rayleigh flat fading. The unit-mean exponential fade nu^2 is split into bins of
equal probability, each represented by its conditional mean so the mean channel gain (and so
the mean harvested energy) is preserved exactly.
'''
from dataclasses import dataclass

import numpy as np

from wpcn_mdp.params import ConfigurationError, ContractViolation


@dataclass(frozen=True, eq=False)
class FadingBins:
    n_bins: int
    # n_bins + 1 increasing values, first 0, last +inf
    boundaries: np.ndarray
    # conditional means of Exp(1) on each bin
    representatives: np.ndarray

    def cdf(self, x):
        return -np.expm1(-np.asarray(x, dtype=float))

    def bin_index(self, nu2):
        '''
        Maps continuous fades to the bin containing them.
        '''
        idx = np.searchsorted(self.boundaries, nu2, side="right") - 1
        return np.clip(idx, 0, self.n_bins - 1)


def equal_probability_bins(n):
    if n < 1:
        raise ConfigurationError(f"channel_bins must be >= 1, got {n}")

    k = np.arange(n + 1)
    survival = 1.0 - k / n
    boundaries = np.empty(n + 1)
    boundaries[:-1] = -np.log1p(-k[:-1] / n)
    boundaries[-1] = np.inf

    # E[X 1{X >= a}] = (a + 1) e^{-a}; e^{-a_k} is exactly the survival 1 - k/n,
    # and the unbounded last bin contributes nothing at its upper edge
    partial = np.zeros(n + 1)
    partial[:-1] = (boundaries[:-1] + 1.0) * survival[:-1]
    representatives = n * (partial[:-1] - partial[1:])

    return FadingBins(n_bins=n, boundaries=boundaries, representatives=representatives)


def bin_gain(bins, k, mean_gain):
    if not 0 <= k < bins.n_bins:
        raise ContractViolation(f"bin index {k} out of range [0, {bins.n_bins})")

    return mean_gain * bins.representatives[k]


def sample_bin(rng, n, size=None):
    '''
    Uniform draw over {0, ..., n-1}; every bin has probability 1/n by construction.

    :param rng: numpy Generator (seeded by the caller)
    '''
    return rng.integers(0, n, size=size)


def sample_fade(rng, size=None):
    return rng.exponential(1.0, size=size)
