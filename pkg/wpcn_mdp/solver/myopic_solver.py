'''
Slot-oriented baseline: whatever is stored is spent in the current slot, and the action is
chosen for its immediate reward alone.
'''
import logging
import time

import numpy as np

from wpcn_mdp.action_space import FEASIBILITY_SLACK, ActionTable, OperatingMode, enumerate_actions
from wpcn_mdp.solver.base_solver import MdpSolver, SolveResult
from wpcn_mdp.solver.markov_chain import evaluate_policy_exact
from wpcn_mdp.solver.policy import Policy, policy_dynamics

logger = logging.getLogger(__name__)


class MyopicSolver(MdpSolver):
    mode = OperatingMode.MYOPIC

    def action_table(self, b1, b2):
        '''
        Full-duplex actions in which each device spends the largest amount its airtime allows:
        e_i = b_i, or the last spend before rho_max would be exceeded.
        '''
        params = self.params
        table = enumerate_actions((b1, b2), self.grid, self.mode, params, prune=False)

        discharging = np.ones(len(table), dtype=bool)
        for device, b in ((0, b1), (1, b2)):
            spend = table.e[:, device]
            one_more = (spend + 1) * params.quantum(device)
            capped = one_more > params.rho_max(device) * table.tau[:, device + 1] * (1.0 + FEASIBILITY_SLACK)
            discharging &= (spend == b) | capped

        return ActionTable(tau=table.tau[discharging], p=table.p[discharging], e=table.e[discharging])

    def myopic_policy(self):
        '''
        Per state, the action with the largest immediate weighted reward. Equal rewards go to
        the action harvesting the most quanta, then to the first in enumeration order.
        '''
        space = self.state_space
        n2 = space.n_bins ** 2
        policy = Policy.empty(space)
        n_ch = space.n_channel_states

        for j, block in enumerate(self.blocks):
            c1, c2 = self.harvest_quanta(block.table)
            harvest = (c1[:, None, :] + c2[None, :, :]).reshape(n2, -1)

            # channel index = g_combo * n^2 + h_combo
            reward = np.tile(block.reward, (n2, 1))
            harvest = np.repeat(harvest, n2, axis=0)

            top = reward == reward.max(axis=1, keepdims=True)
            best = np.where(top, harvest, -1).argmax(axis=1)

            rows = slice(j * n_ch, (j + 1) * n_ch)
            policy.tau[rows] = block.table.tau[best]
            policy.p[rows] = block.table.p[best]
            policy.e[rows] = block.table.e[best]

        policy.defined[:] = True
        return policy

    def solve(self, initial_values=None):
        '''
        No relative values exist for a fixed greedy rule; the gain is the exact long-run
        average of the myopic policy from empty batteries.
        '''
        start = time.perf_counter()
        params = self.params
        policy = self.myopic_policy()
        g1, g2 = evaluate_policy_exact(policy_dynamics(policy, params), self.state_space).gain
        gain = float(params.alpha * g1 + (1.0 - params.alpha) * g2)
        wall_time = time.perf_counter() - start

        logger.info("myopic: gain %.6g bits/slot (%.2fs)", gain, wall_time)

        return SolveResult(gain=gain,
                           values=None,
                           policy=policy,
                           iterations=0,
                           span=0.0,
                           gain_bounds=(gain, gain),
                           wall_time=wall_time,
                           mode=self.mode.value,
                           params_hash=params.params_hash())
