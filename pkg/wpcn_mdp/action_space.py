'''
Finite action sets searched by each Bellman backup. Durations live on the simplex lattice
{k T / m}, AP powers on an evenly spaced grid from 0 to P_max, and uplink spends are whole
battery quanta with the uplink power implied by spend and duration.
'''
import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from wpcn_mdp.params import ConfigurationError
from wpcn_mdp.wpcn_core import Action, BatteryLevels, harvest_exposure

# relative slack on the float constraints (simplex, power and rho bounds)
FEASIBILITY_SLACK = 1e-9


class OperatingMode(enum.Enum):
    FULL_DUPLEX = "fd"
    HALF_DUPLEX = "hd"
    # full-duplex feasibility, greedy per-slot policy
    MYOPIC = "myopic"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ConfigurationError(f"mode must be one of {[m.value for m in cls]}, got {text!r}")


@dataclass(frozen=True, eq=False)
class ActionGrid:
    tau_steps: int
    slot_length: float
    p_values: np.ndarray

    @classmethod
    def from_params(cls, params):
        return cls(tau_steps=params.tau_grid_steps, slot_length=params.slot_length_T, p_values=params.p_values())

    @property
    def tau_values(self):
        return self.slot_length * np.arange(self.tau_steps + 1) / self.tau_steps


@dataclass(frozen=True, eq=False)
class ActionTable:
    '''
    Feasible actions of one battery pair stored column-wise, in enumeration order.
    Row 0 is always the idle action.
    '''
    tau: np.ndarray
    p: np.ndarray
    e: np.ndarray

    def __len__(self):
        return len(self.e)

    def action(self, i):
        return Action(tau=tuple(float(v) for v in self.tau[i]),
                      p=tuple(float(v) for v in self.p[i]),
                      e=tuple(int(v) for v in self.e[i]))

    def __iter__(self):
        return (self.action(i) for i in range(len(self)))


@lru_cache(maxsize=None)
def tau_simplex(m):
    '''
    Lattice points (k0, k1, k2) with k0 + k1 + k2 <= m, lexicographic order.
    '''
    return np.array([(k0, k1, k2)
                     for k0 in range(m + 1)
                     for k1 in range(m + 1 - k0)
                     for k2 in range(m + 1 - k0 - k1)], dtype=np.int64)


def _battery_pair(batteries):
    if isinstance(batteries, BatteryLevels):
        return tuple(batteries.b)
    return tuple(int(b) for b in batteries)


def enumerate_actions(batteries, grid, mode, params, prune=False):
    '''
    Every grid action feasible for the given battery levels: durations on the simplex,
    powers within [0, P_max] (P1 = P2 = 0 in half-duplex), spends within the stored quanta,
    no spend without airtime, implied uplink power within rho_max.

    :param batteries: (b1, b2) in quanta, or BatteryLevels
    :param prune: drop actions whose reward and battery transition duplicate an earlier one
    :return: ActionTable in lexicographic order of (tau, P, e) grid indices
    '''
    mode = OperatingMode.parse(mode)
    if grid.tau_steps < 1 or len(grid.p_values) == 0:
        raise ConfigurationError("action grid is empty")

    b1, b2 = _battery_pair(batteries)
    simplex = tau_simplex(grid.tau_steps)
    n_p = len(grid.p_values)
    n_uplink_p = 1 if mode is OperatingMode.HALF_DUPLEX else n_p

    idx = np.indices((len(simplex), n_p, n_uplink_p, n_uplink_p, b1 + 1, b2 + 1)).reshape(6, -1)
    k = simplex[idx[0]]
    tau = k * (grid.slot_length / grid.tau_steps)
    p = np.stack([grid.p_values[idx[1]], grid.p_values[idx[2]], grid.p_values[idx[3]]], axis=1)
    e = np.stack([idx[4], idx[5]], axis=1)

    feasible = np.ones(len(e), dtype=bool)
    for device in (0, 1):
        airtime = tau[:, device + 1]
        spend = e[:, device]
        feasible &= (spend == 0) | (k[:, device + 1] > 0)
        feasible &= spend * params.quantum(device) <= params.rho_max(device) * airtime * (1.0 + FEASIBILITY_SLACK)

    table = ActionTable(tau=tau[feasible], p=p[feasible], e=e[feasible])

    if prune:
        table = prune_duplicate_effects(table, params)

    return table


def effect_keys(table, params):
    '''
    Columns that fully determine an action's reward and battery transition in every channel
    state: per device the spend, its airtime and interference power (only when spending), and
    the tau*P exposure it harvests from.
    '''
    columns = []
    for device in (0, 1):
        spending = table.e[:, device] > 0
        columns.append(table.e[:, device].astype(float))
        columns.append(np.where(spending, table.tau[:, device + 1], 0.0))
        columns.append(np.where(spending, params.gamma_si * table.p[:, device + 1], 0.0))
        columns.append(harvest_exposure(device, table.tau, table.p))
    return np.stack(columns, axis=1)


def prune_duplicate_effects(table, params):
    _, first = np.unique(effect_keys(table, params), axis=0, return_index=True)
    keep = np.sort(first)
    return ActionTable(tau=table.tau[keep], p=table.p[keep], e=table.e[keep])


def is_feasible(action, batteries, params, mode):
    '''
    :return: (True, None) or (False, tag) naming the first violated constraint, one of
             tau_negative, simplex, power, half_duplex, battery, idle_spend, rho_max
    '''
    mode = OperatingMode.parse(mode)
    b = _battery_pair(batteries)
    tau = np.asarray(action.tau, dtype=float)
    p = np.asarray(action.p, dtype=float)

    if np.any(tau < 0):
        return False, "tau_negative"

    if tau.sum() > params.slot_length_T * (1.0 + FEASIBILITY_SLACK):
        return False, "simplex"

    if np.any(p < 0) or np.any(p > params.p_max * (1.0 + FEASIBILITY_SLACK)):
        return False, "power"

    if mode is OperatingMode.HALF_DUPLEX and (p[1] > 0 or p[2] > 0):
        return False, "half_duplex"

    for device in (0, 1):
        if not 0 <= action.e[device] <= b[device]:
            return False, "battery"

    for device in (0, 1):
        if action.e[device] > 0 and tau[device + 1] <= 0:
            return False, "idle_spend"

    for device in (0, 1):
        spent = action.e[device] * params.quantum(device)
        if spent > params.rho_max(device) * tau[device + 1] * (1.0 + FEASIBILITY_SLACK):
            return False, "rho_max"

    return True, None
