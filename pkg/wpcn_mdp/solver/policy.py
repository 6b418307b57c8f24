'''
Stationary deterministic policies over the dense state space, and the per-state dynamics a
policy induces (rates and next battery pair in every state).
'''
from dataclasses import dataclass

import numpy as np

from wpcn_mdp.wpcn_core import Action, device_rate, harvest_exposure, next_battery, quantize_harvest


class PolicyLookupError(KeyError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"policy has no action for state {tuple(state)}")


@dataclass(eq=False)
class Policy:
    '''
    Total map state -> action, stored column-wise. `defined` marks the states that carry an
    action; policies read back from partial files may leave some undefined.
    '''
    state_space: object
    tau: np.ndarray
    p: np.ndarray
    e: np.ndarray
    defined: np.ndarray

    @classmethod
    def empty(cls, state_space):
        size = len(state_space)
        return cls(state_space=state_space,
                   tau=np.zeros((size, 3)),
                   p=np.zeros((size, 3)),
                   e=np.zeros((size, 2), dtype=np.int64),
                   defined=np.zeros(size, dtype=bool))

    @classmethod
    def constant(cls, state_space, action):
        policy = cls.empty(state_space)
        policy.tau[:] = action.tau
        policy.p[:] = action.p
        policy.e[:] = action.e
        policy.defined[:] = True
        return policy

    def __len__(self):
        return len(self.defined)

    def _resolve(self, state):
        if isinstance(state, (int, np.integer)):
            return int(state)
        return self.state_space.index(state)

    def __getitem__(self, state):
        idx = self._resolve(state)
        if not self.defined[idx]:
            raise PolicyLookupError(self.state_space.state(idx))

        return Action(tau=tuple(float(v) for v in self.tau[idx]),
                      p=tuple(float(v) for v in self.p[idx]),
                      e=tuple(int(v) for v in self.e[idx]))

    def __setitem__(self, state, action):
        idx = self._resolve(state)
        self.tau[idx] = action.tau
        self.p[idx] = action.p
        self.e[idx] = action.e
        self.defined[idx] = True

    @property
    def is_total(self):
        return bool(self.defined.all())


@dataclass(eq=False)
class PolicyDynamics:
    # unweighted bits per slot of each device, per state
    rate1: np.ndarray
    rate2: np.ndarray
    # battery-pair index reached from each state, -1 where the policy is undefined
    next_pair: np.ndarray

    def weighted(self, alpha):
        return alpha * self.rate1 + (1.0 - alpha) * self.rate2


def policy_dynamics(policy, params):
    '''
    Evaluates a policy's action in every state of the discretized model: uplink rates with the
    state's uplink bins, harvest with its downlink bins, then the quantized battery update.
    '''
    space = policy.state_space
    nch = space.n_channel_states
    g1, g2, h1, h2 = (np.tile(x, space.n_battery_pairs) for x in space.channel_gains())
    b1, b2 = (np.repeat(b, nch) for b in space.battery_levels())

    e = np.where(policy.defined[:, None], policy.e, 0)
    rate1 = np.where(policy.defined, device_rate(0, policy.tau, policy.p, e, h1, params), 0.0)
    rate2 = np.where(policy.defined, device_rate(1, policy.tau, policy.p, e, h2, params), 0.0)

    next_levels = []
    for device, b, g in ((0, b1, g1), (1, b2, g2)):
        eta = params.devices[device].harvest_efficiency
        c = quantize_harvest(eta * g * harvest_exposure(device, policy.tau, policy.p), params.quantum(device))
        next_levels.append(next_battery(b, e[:, device], c, params.b_max(device)))

    next_pair = next_levels[0] * (space.b_max[1] + 1) + next_levels[1]
    next_pair = np.where(policy.defined, next_pair, -1)

    return PolicyDynamics(rate1=rate1, rate2=rate2, next_pair=next_pair)
