'''
Average-reward dynamic programming over the discretized network.

Given a state, an action's reward depends only on the uplink bins and its battery update only
on the downlink bins, while the next channel state is uniform and independent of everything.
The expected next value of an action therefore reduces to W(b1', b2'), the channel-averaged
relative value of the battery pair it leads to, and one backup over a battery pair is

    Q[c, a] = reward[h_combo(c), a] + W[next_pair[g_combo(c), a]]

evaluated for all channel states c and actions a at once.
'''
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from wpcn_mdp.action_space import ActionGrid, enumerate_actions, is_feasible
from wpcn_mdp.params import ContractViolation
from wpcn_mdp.solver.policy import Policy
from wpcn_mdp.solver.state_space import MdpState, StateSpace
from wpcn_mdp.wpcn_core import device_rate, harvest_exposure, harvested_quanta, next_battery, quantize_harvest

logger = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    def __init__(self, iterations, last_span, spans):
        self.iterations = iterations
        self.last_span = last_span
        self.spans = spans
        super().__init__(f"relative value iteration stopped after {iterations} sweeps with span {last_span:.6g}")


class Transition(NamedTuple):
    batteries: Tuple[int, int]
    # (next state, probability) for every channel state
    successors: List[Tuple[MdpState, Fraction]]


@dataclass(eq=False)
class BlockModel:
    '''
    Everything a backup needs for one battery pair: its action table, the weighted reward of
    each action for every uplink combination and the battery pair it leads to for every
    downlink combination.
    '''
    table: object
    reward: np.ndarray
    next_pair: np.ndarray


@dataclass(eq=False)
class SolveResult:
    gain: float
    values: Optional[np.ndarray]
    policy: Policy
    iterations: int
    span: float
    gain_bounds: Tuple[float, float]
    wall_time: float
    mode: str
    params_hash: str
    spans: List[float] = field(default_factory=list)


class MdpSolver():
    '''
    Relative value iteration for one operating mode. Subclasses set `mode`; the myopic
    baseline overrides `solve`.
    '''

    mode = None

    def __init__(self, params, workers=1, log_every=100):
        self.params = params
        self.state_space = StateSpace(params)
        self.grid = ActionGrid.from_params(params)
        self.workers = workers
        self.log_every = log_every

    @cached_property
    def blocks(self):
        start = time.perf_counter()
        blocks = [self.build_block(*self.state_space.battery_pair(j))
                  for j in range(self.state_space.n_battery_pairs)]
        logger.debug("%s: built %d battery-pair blocks, %d actions in total (%.2fs)",
                     self.mode.value, len(blocks), sum(len(b.table) for b in blocks),
                     time.perf_counter() - start)
        return blocks

    def action_table(self, b1, b2):
        return enumerate_actions((b1, b2), self.grid, self.mode, self.params, prune=True)

    def harvest_quanta(self, table):
        '''
        :return: per device, (n_bins, n_actions) quanta harvested under each downlink bin
        '''
        quanta = []
        for device in (0, 1):
            eta = self.params.devices[device].harvest_efficiency
            exposure = harvest_exposure(device, table.tau, table.p)
            energy = eta * self.state_space.bin_gains(device)[:, None] * exposure[None, :]
            quanta.append(quantize_harvest(energy, self.params.quantum(device)))
        return quanta

    def build_block(self, b1, b2):
        params = self.params
        space = self.state_space
        n = space.n_bins
        table = self.action_table(b1, b2)

        next_levels = [next_battery(b, table.e[None, :, device], c, params.b_max(device))
                       for device, b, c in zip((0, 1), (b1, b2), self.harvest_quanta(table))]

        # downlink combination index k_g1 * n + k_g2
        next_pair = (next_levels[0][:, None, :] * (space.b_max[1] + 1) + next_levels[1][None, :, :])
        next_pair = next_pair.reshape(n * n, len(table))

        r1 = device_rate(0, table.tau, table.p, table.e, space.bin_gains(0)[:, None], params)
        r2 = device_rate(1, table.tau, table.p, table.e, space.bin_gains(1)[:, None], params)
        reward = (params.alpha * r1[:, None, :] + (1.0 - params.alpha) * r2[None, :, :]).reshape(n * n, len(table))

        return BlockModel(table=table, reward=reward, next_pair=next_pair)

    ##########
    # Transitions and backups
    ##########

    def successor(self, state, action):
        '''
        Deterministic battery update given the state's downlink bins; every channel state of
        the next slot is reached with probability 1/n_ch.
        '''
        state = MdpState(*state)
        params = self.params
        ok, tag = is_feasible(action, (state.b1, state.b2), params, self.mode)
        if not ok:
            raise ContractViolation(f"action {action} infeasible in state {tuple(state)}: {tag}")

        g = (self.state_space.bin_gains(0)[state.k_g1], self.state_space.bin_gains(1)[state.k_g2])
        levels = tuple(next_battery(b, action.e[device], harvested_quanta(device, action, g[device], params),
                                    params.b_max(device))
                       for device, b in ((0, state.b1), (1, state.b2)))

        space = self.state_space
        probability = Fraction(1, space.n_channel_states)
        successors = [(MdpState(*levels, *space.channel_state(c)), probability)
                      for c in range(space.n_channel_states)]
        return Transition(batteries=levels, successors=successors)

    def channel_average(self, values):
        space = self.state_space
        return np.asarray(values, dtype=float).reshape(space.n_battery_pairs, space.n_channel_states).mean(axis=1)

    def q_values(self, j, averaged):
        '''
        :return: (n_channel_states, n_actions) action values of battery pair j
        '''
        block = self.blocks[j]
        n2 = self.state_space.n_bins ** 2
        q = averaged[block.next_pair][:, None, :] + block.reward[None, :, :]
        return q.reshape(n2 * n2, -1)

    def bellman_backup(self, state, values):
        '''
        max over feasible actions of reward + sum_s' P(s'|s,a) values(s'); the first maximizer
        in enumeration order wins ties.
        '''
        idx = self.state_space.index(state)
        j, c = divmod(idx, self.state_space.n_channel_states)
        q = self.q_values(j, self.channel_average(values))[c]
        best = int(np.argmax(q))
        return float(q[best]), self.blocks[j].table.action(best)

    def _sweep_block(self, j, averaged):
        q = self.q_values(j, averaged)
        best = q.argmax(axis=1)
        return q[np.arange(len(q)), best], best

    def sweep(self, values, pool=None):
        '''
        One synchronous backup of every state, spread over `pool` when one is given.

        :return: backed-up values (flat), argmax action index per state
        '''
        averaged = self.channel_average(values)
        n_pairs = self.state_space.n_battery_pairs

        if pool is not None:
            results = list(pool.map(lambda j: self._sweep_block(j, averaged), range(n_pairs)))
        else:
            results = [self._sweep_block(j, averaged) for j in range(n_pairs)]

        backed_up = np.concatenate([r[0] for r in results])
        best = np.stack([r[1] for r in results])
        return backed_up, best

    def worker_pool(self):
        '''
        Threads shared by every sweep of one run; a no-op context when workers == 1.
        '''
        if self.workers > 1:
            return ThreadPoolExecutor(max_workers=self.workers)
        return nullcontext()

    def extract_policy(self, best):
        policy = Policy.empty(self.state_space)
        n_ch = self.state_space.n_channel_states
        for j, block in enumerate(self.blocks):
            rows = slice(j * n_ch, (j + 1) * n_ch)
            policy.tau[rows] = block.table.tau[best[j]]
            policy.p[rows] = block.table.p[best[j]]
            policy.e[rows] = block.table.e[best[j]]
        policy.defined[:] = True
        return policy

    ##########
    # Relative value iteration
    ##########

    def relative_value_iteration(self, initial_values=None):
        '''
        Iterates h <- h + theta (Th - h), renormalized so that h(reference) = 0, until the span
        of Th - h falls below rvi_tolerance relative to the gain. theta = rvi_damping is an
        aperiodicity transform; theta = 1 is the plain scheme. min/max of Th - h bracket the
        optimal gain at every sweep.

        :return: SolveResult
        '''
        params = self.params
        space = self.state_space
        ref = space.reference_index
        theta = params.rvi_damping
        start = time.perf_counter()

        if initial_values is None:
            h = np.zeros(len(space))
        else:
            h = np.array(initial_values, dtype=float)
            h -= h[ref]

        # action tables are built once, before the first sweep
        self.blocks

        spans = []
        with self.worker_pool() as pool:
            for iteration in range(1, params.rvi_max_iterations + 1):
                backed_up, best = self.sweep(h, pool=pool)
                diff = backed_up - h
                low, high = float(diff.min()), float(diff.max())
                span = high - low
                spans.append(span)

                if iteration % self.log_every == 0:
                    logger.debug("%s sweep %d: span %.6g, gain in [%.6g, %.6g]",
                                 self.mode.value, iteration, span, low, high)

                if span <= params.rvi_tolerance * max(abs(low), abs(high)):
                    break

                h = h + theta * diff
                h -= h[ref]
            else:
                raise ConvergenceError(params.rvi_max_iterations, spans[-1], spans)

        gain = float(backed_up[ref] - h[ref])
        wall_time = time.perf_counter() - start
        logger.info("%s: gain %.6g bits/slot after %d sweeps (span %.3g, %.2fs)",
                    self.mode.value, gain, iteration, span, wall_time)

        return SolveResult(gain=gain,
                           values=h,
                           policy=self.extract_policy(best),
                           iterations=iteration,
                           span=span,
                           gain_bounds=(low, high),
                           wall_time=wall_time,
                           mode=self.mode.value,
                           params_hash=params.params_hash(),
                           spans=spans)

    def solve(self, initial_values=None):
        return self.relative_value_iteration(initial_values=initial_values)
