'''
Slot-level physics of the full-duplex network: energy harvested by each device, the quantized
battery update, the uplink rate under residual self-interference and the weighted slot reward.

Every function accepts scalars or numpy arrays (broadcast elementwise) so that the solver can
evaluate whole action tables at once with the same code used for single actions.
'''
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from wpcn_mdp.params import ContractViolation

# floor() of the harvested quanta tolerates this much round-off below an integer
QUANTA_ROUNDING = 1e-9


@dataclass(frozen=True)
class Action:
    '''
    Per-slot decision: durations (tau0, tau1, tau2) in seconds, AP transfer powers
    (P0, P1, P2) in watts and uplink spends (e1, e2) in battery quanta.
    '''
    tau: Tuple[float, float, float]
    p: Tuple[float, float, float]
    e: Tuple[int, int]

    def rho(self, device, params):
        ''' implied uplink power e_i Q_i / tau_i, 0 when the device does not transmit '''
        tau = self.tau[device + 1]
        if tau <= 0:
            return 0.0
        return self.e[device] * params.quantum(device) / tau

    def as_tuple(self):
        return tuple(self.tau) + tuple(self.p) + tuple(self.e)


IDLE = Action(tau=(0.0, 0.0, 0.0), p=(0.0, 0.0, 0.0), e=(0, 0))


@dataclass(frozen=True)
class BatteryLevels:
    b: Tuple[int, int]
    b_max: Tuple[int, int]
    quantum: Tuple[float, float]

    def __post_init__(self):
        for level, cap in zip(self.b, self.b_max):
            if not 0 <= level <= cap:
                raise ContractViolation(f"battery level {level} outside [0, {cap}]")

    def energy(self, device):
        return self.b[device] * self.quantum[device]


def harvest_exposure(device, tau, p):
    '''
    Sum of tau_j P_j over the slot portions in which `device` is not transmitting.
    tau and p are (..., 3) arrays or 3-sequences.
    '''
    tau = np.asarray(tau, dtype=float)
    p = np.asarray(p, dtype=float)
    own = device + 1
    others = [j for j in range(3) if j != own]
    return tau[..., others[0]] * p[..., others[0]] + tau[..., others[1]] * p[..., others[1]]


def harvested_energy(device, action, g, params):
    '''
    Energy (J) harvested by `device` during one slot with downlink gain g. The device cannot
    harvest during its own uplink portion (one antenna); harvest from the other device's
    uplink signal and from noise is neglected.
    '''
    eta = params.devices[device].harvest_efficiency
    return eta * g * harvest_exposure(device, action.tau, action.p)


def harvested_quanta(device, action, g, params):
    return quantize_harvest(harvested_energy(device, action, g, params), params.quantum(device))


def quantize_harvest(energy, quantum):
    quanta = np.floor(np.asarray(energy, dtype=float) / quantum + QUANTA_ROUNDING)
    if np.ndim(quanta) == 0:
        return int(quanta)
    return quanta.astype(np.int64)


def next_battery(b, e, c, b_max):
    '''
    Discretized battery update min(b_max, b - e + c), all in quanta.
    '''
    if np.any(np.asarray(e) > np.asarray(b)):
        raise ContractViolation(f"uplink spend {e} exceeds stored quanta {b}")

    level = np.minimum(b_max, np.asarray(b) - np.asarray(e) + np.asarray(c))
    if np.ndim(level) == 0:
        return int(level)
    return level


def implied_rho(tau_i, e_i, quantum):
    tau_i = np.asarray(tau_i, dtype=float)
    energy = np.asarray(e_i, dtype=float) * quantum
    return np.divide(energy, tau_i, out=np.zeros(np.broadcast(energy, tau_i).shape), where=tau_i > 0)


def uplink_rate(tau_i, rho_i, p_i, h_i, sigma2, gamma_si, bandwidth):
    '''
    Bits delivered in one slot: bandwidth * tau * log2(1 + h rho / (sigma^2 + gamma P)).
    Zero when the device does not transmit.
    '''
    sinr = np.asarray(h_i) * rho_i / (sigma2 + gamma_si * np.asarray(p_i))
    rate = bandwidth * np.asarray(tau_i) * np.log2(1.0 + sinr)
    if np.ndim(rate) == 0:
        return float(rate)
    return rate


def device_rate(device, tau, p, e, h, params):
    '''
    uplink_rate of `device` for (..., 3) tau/p arrays and (..., 2) spends, with rho implied
    by the spend.
    '''
    tau = np.asarray(tau, dtype=float)
    p = np.asarray(p, dtype=float)
    e = np.asarray(e)
    tau_i = tau[..., device + 1]
    rho_i = implied_rho(tau_i, e[..., device], params.quantum(device))
    return uplink_rate(tau_i, rho_i, p[..., device + 1], h, params.noise_power, params.gamma_si,
                       params.bandwidth_hz)


def slot_reward(h1, h2, action, params):
    '''
    Weighted bits of one slot, alpha R_1 + (1 - alpha) R_2.
    '''
    r1 = device_rate(0, action.tau, action.p, action.e, h1, params)
    r2 = device_rate(1, action.tau, action.p, action.e, h2, params)
    return params.alpha * r1 + (1.0 - params.alpha) * r2
