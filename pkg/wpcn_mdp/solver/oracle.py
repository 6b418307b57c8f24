'''
Brute-force verifier for toy instances: evaluates every stationary deterministic policy that
differs on the states reachable from empty batteries, and keeps the best long-run average.
'''
import itertools
import logging
import math
from typing import NamedTuple

import numpy as np

from wpcn_mdp.action_space import OperatingMode
from wpcn_mdp.params import ConfigurationError
from wpcn_mdp.solver.full_duplex_solver import FullDuplexSolver
from wpcn_mdp.solver.half_duplex_solver import HalfDuplexSolver
from wpcn_mdp.solver.markov_chain import battery_chain, long_run_average
from wpcn_mdp.solver.policy import Policy
from wpcn_mdp.utils import progress_bar

logger = logging.getLogger(__name__)

DEFAULT_POLICY_CAP = 1_000_000

# battery pair index of (0, 0)
EMPTY_BATTERIES = 0


class OracleRefused(RuntimeError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"more than {cap} candidate policies (stopped at {count})")


class OracleResult(NamedTuple):
    gain: float
    policy: Policy
    policy_count: int
    # candidate policies whose chain had more than one closed class
    n_reducible: int


def state_options(block, n_bins):
    '''
    For every channel state of a battery pair, one action per distinct successor battery
    pair: the first one with the highest reward. Actions sharing a successor with a better
    one are dominated.

    :return: list over channel states of [(next_pair, reward, action_index), ...]
    '''
    n2 = n_bins ** 2
    options = []
    for c in range(n2 * n2):
        g_combo, h_combo = divmod(c, n2)
        next_pair = block.next_pair[g_combo]
        reward = block.reward[h_combo]
        choices = []
        for target in np.unique(next_pair):
            candidates = np.flatnonzero(next_pair == target)
            best = candidates[np.argmax(reward[candidates])]
            choices.append((int(target), float(reward[best]), int(best)))
        options.append(choices)
    return options


def exact_gain_oracle(params, mode, cap=DEFAULT_POLICY_CAP):
    '''
    The gain is measured from empty batteries, so policies that differ only on battery pairs
    never reached from there have the same gain. Candidates are therefore assignments of one
    option combination to every reachable battery pair; pairs left unreached take their first
    option in the returned policy.

    :param mode: "fd" or "hd"
    :param cap: refuse once more candidate policies than this have been found
    :return: OracleResult
    '''
    mode = OperatingMode.parse(mode)
    if mode is OperatingMode.FULL_DUPLEX:
        solver = FullDuplexSolver(params)
    elif mode is OperatingMode.HALF_DUPLEX:
        solver = HalfDuplexSolver(params)
    else:
        raise ConfigurationError(f"the oracle optimizes over fd or hd action sets, not {mode.value}")

    space = solver.state_space
    options = [state_options(block, space.n_bins) for block in solver.blocks]
    largest = max(math.prod(len(o) for o in pair) for pair in options)
    if largest > cap:
        raise OracleRefused(largest, cap)
    pair_options = [list(itertools.product(*pair)) for pair in options]
    logger.info("oracle (%s): %d battery pairs, %d option combinations from empty batteries",
                mode.value, len(pair_options), len(pair_options[EMPTY_BATTERIES]))

    best_gain, best, count, n_reducible = _search(pair_options, cap)
    logger.info("oracle (%s): best gain %.6g among %d candidate policies", mode.value, best_gain, count)

    policy = Policy.empty(space)
    n_ch = space.n_channel_states
    for j, block in enumerate(solver.blocks):
        combo = best.get(j, pair_options[j][0])
        for c, (_, _, action_idx) in enumerate(combo):
            policy[j * n_ch + c] = block.table.action(action_idx)

    return OracleResult(gain=best_gain, policy=policy, policy_count=count, n_reducible=n_reducible)


def reachable_assignments(pair_options, assigned, frontier):
    '''
    Depth-first over every way of completing `assigned` (battery pair -> option combination)
    so that it covers all pairs reachable from it. `frontier` holds the reached pairs still
    without a combination. Yields the same dict object each time; copy it to keep it.
    '''
    if not frontier:
        yield assigned
        return

    j = min(frontier)
    rest = frontier - {j}
    for combo in pair_options[j]:
        assigned[j] = combo
        reached = {target for target, _, _ in combo if target not in assigned}
        yield from reachable_assignments(pair_options, assigned, rest | reached)
    del assigned[j]


def assignment_gain(assigned, start=EMPTY_BATTERIES):
    '''
    :return: (long-run average reward from `start`, number of closed classes)
    '''
    if len(next(iter(assigned.values()))) == 1:
        # one channel state: the walk is deterministic and ends in a single cycle
        visited, order = {}, []
        j = start
        while j not in visited:
            visited[j] = len(order)
            order.append(j)
            j = assigned[j][0][0]
        cycle = order[visited[j]:]
        return sum(assigned[k][0][1] for k in cycle) / len(cycle), 1

    pairs = sorted(assigned)
    position = {j: i for i, j in enumerate(pairs)}
    next_pair = np.array([[position[target] for target, _, _ in assigned[j]] for j in pairs])
    reward = np.array([[r for _, r, _ in assigned[j]] for j in pairs]).mean(axis=1)
    evaluation = long_run_average(battery_chain(next_pair, len(pairs)), reward, start=position[start])
    return float(evaluation.gain), evaluation.n_closed_classes


@progress_bar("oracle")
def _search(pair_options, cap):
    best_gain, best, count, n_reducible = -math.inf, None, 0, 0
    roots = pair_options[EMPTY_BATTERIES]

    for k, root in enumerate(roots):
        yield k / len(roots)

        assigned = {EMPTY_BATTERIES: root}
        frontier = frozenset(target for target, _, _ in root) - {EMPTY_BATTERIES}
        for candidate in reachable_assignments(pair_options, assigned, frontier):
            count += 1
            if count > cap:
                raise OracleRefused(count, cap)

            gain, n_closed = assignment_gain(candidate)
            if n_closed > 1:
                n_reducible += 1
            # strict improvement keeps the first optimal candidate in search order
            if gain > best_gain:
                best_gain, best = gain, dict(candidate)

    yield 1
    return best_gain, best, count, n_reducible
