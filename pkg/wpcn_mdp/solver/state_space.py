'''
Dense indexing of the Markov chain states (b1, b2, k_g1, k_g2, k_h1, k_h2).

index = battery_index * n_channel_states + channel_index, where
battery_index = b1 * (b2_max + 1) + b2 and
channel_index = ((k_g1 * n + k_g2) * n + k_h1) * n + k_h2.
Downlink bins vary slowest within the channel index so that a channel index splits into a
downlink combination (k_g1, k_g2) and an uplink combination (k_h1, k_h2):
channel_index = g_combo * n^2 + h_combo.
'''
from typing import NamedTuple

import numpy as np

from wpcn_mdp.channel import bin_gain, equal_probability_bins
from wpcn_mdp.params import ConfigurationError, ContractViolation


class StateSpaceTooLarge(ConfigurationError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"state space has {count} states, above max_states = {cap}")


class MdpState(NamedTuple):
    b1: int
    b2: int
    k_g1: int
    k_g2: int
    k_h1: int
    k_h2: int


class StateSpace():
    reference_index = 0

    def __init__(self, params):
        self.b_max = (params.b_max(0), params.b_max(1))
        self.n_bins = params.channel_bins
        self.n_battery_pairs = (self.b_max[0] + 1) * (self.b_max[1] + 1)
        self.n_channel_states = self.n_bins ** 4
        self.size = self.n_battery_pairs * self.n_channel_states

        if self.size > params.max_states:
            raise StateSpaceTooLarge(self.size, params.max_states)

        self.bins = equal_probability_bins(self.n_bins)

        mean_g = (params.mean_gain(0), params.mean_gain(1))
        self._gains = tuple(np.array([bin_gain(self.bins, k, mean_g[device]) for k in range(self.n_bins)])
                            for device in (0, 1))

    def __len__(self):
        return self.size

    def __iter__(self):
        return (self.state(i) for i in range(self.size))

    ##########
    # index <-> tuple
    ##########

    def battery_index(self, b1, b2):
        return b1 * (self.b_max[1] + 1) + b2

    def battery_pair(self, j):
        return divmod(int(j), self.b_max[1] + 1)

    def channel_index(self, k_g1, k_g2, k_h1, k_h2):
        n = self.n_bins
        return ((k_g1 * n + k_g2) * n + k_h1) * n + k_h2

    def channel_state(self, c):
        n = self.n_bins
        c, k_h2 = divmod(int(c), n)
        c, k_h1 = divmod(c, n)
        k_g1, k_g2 = divmod(c, n)
        return k_g1, k_g2, k_h1, k_h2

    def index(self, state):
        state = MdpState(*state)
        if not (0 <= state.b1 <= self.b_max[0] and 0 <= state.b2 <= self.b_max[1]):
            raise ContractViolation(f"battery levels of {state} outside the grid {self.b_max}")
        if not all(0 <= k < self.n_bins for k in state[2:]):
            raise ContractViolation(f"channel bins of {state} outside [0, {self.n_bins})")

        return self.battery_index(state.b1, state.b2) * self.n_channel_states \
            + self.channel_index(*state[2:])

    def state(self, idx):
        if not 0 <= idx < self.size:
            raise ContractViolation(f"state index {idx} outside [0, {self.size})")

        j, c = divmod(int(idx), self.n_channel_states)
        return MdpState(*self.battery_pair(j), *self.channel_state(c))

    ##########
    # per-state arrays
    ##########

    def bin_gains(self, device):
        ''' discrete gain of each bin for `device` (downlink and uplink share the same law) '''
        return self._gains[device]

    def channel_gains(self):
        '''
        :return: g1, g2, h1, h2 arrays of length n_channel_states
        '''
        n = self.n_bins
        k = np.indices((n, n, n, n)).reshape(4, -1)
        return (self._gains[0][k[0]], self._gains[1][k[1]], self._gains[0][k[2]], self._gains[1][k[3]])

    def battery_levels(self):
        '''
        :return: b1, b2 arrays of length n_battery_pairs
        '''
        j = np.arange(self.n_battery_pairs)
        return j // (self.b_max[1] + 1), j % (self.b_max[1] + 1)
