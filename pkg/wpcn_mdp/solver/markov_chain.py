'''
Exact long-run averages of a fixed policy.

Channel bins are drawn i.i.d. every slot, so the chain a policy induces on full states
factorizes: the battery pair alone is a Markov chain whose kernel averages the policy's
deterministic battery update over the channel states, and the stationary law of a full state
is the battery-pair law times 1/n_ch.
'''
import logging
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)


class ReducibleChainError(RuntimeError):
    def __init__(self, n_classes):
        self.n_classes = n_classes
        super().__init__(f"chain has {n_classes} closed classes; the stationary law is not unique")


class ChainEvaluation(NamedTuple):
    # scalar, or one entry per reward column
    gain: object
    n_closed_classes: int


def battery_chain(next_pair, n_battery_pairs):
    '''
    :param next_pair: (n_battery_pairs, n_channel_states) successor battery pair of each state
    :return: dense (n_battery_pairs, n_battery_pairs) transition matrix
    '''
    next_pair = np.asarray(next_pair)
    n_ch = next_pair.shape[1]
    chain = np.zeros((n_battery_pairs, n_battery_pairs))
    rows = np.repeat(np.arange(n_battery_pairs), n_ch)
    np.add.at(chain, (rows, next_pair.ravel()), 1.0 / n_ch)
    return chain


def closed_classes(chain):
    '''
    Recurrent classes: strongly connected components with no probability leaving them.
    '''
    n, labels = connected_components(csr_matrix(chain > 0), directed=True, connection="strong")
    closed = []
    for label in range(n):
        members = np.flatnonzero(labels == label)
        if chain[np.ix_(members, members)].sum() >= len(members) - 1e-12:
            closed.append(members)
    return closed


def stationary_distribution(chain):
    '''
    Solves pi P = pi, sum(pi) = 1 for a chain with a single closed class.
    '''
    n = len(chain)
    classes = closed_classes(chain)
    if len(classes) != 1:
        raise ReducibleChainError(len(classes))

    system = chain.T - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return scipy.linalg.solve(system, rhs)


def long_run_average(chain, reward, start=0):
    '''
    Average reward per slot of the chain started in `start`. With several closed classes
    the class gains are mixed by the absorption probabilities from `start`.

    :param reward: (n,) or (n, k) reward per state
    '''
    reward = np.asarray(reward, dtype=float)
    classes = closed_classes(chain)

    class_gains = []
    for members in classes:
        pi = stationary_distribution(chain[np.ix_(members, members)])
        class_gains.append(pi @ reward[members])

    if len(classes) == 1:
        return ChainEvaluation(gain=class_gains[0], n_closed_classes=1)

    logger.debug("reducible chain: %d closed classes", len(classes))

    for members, gain in zip(classes, class_gains):
        if start in members:
            return ChainEvaluation(gain=gain, n_closed_classes=len(classes))

    recurrent = np.concatenate(classes)
    transient = np.setdiff1d(np.arange(len(chain)), recurrent)
    pos = int(np.flatnonzero(transient == start)[0])
    fundamental = np.eye(len(transient)) - chain[np.ix_(transient, transient)]

    gain = 0.0
    for members, class_gain in zip(classes, class_gains):
        into_class = chain[np.ix_(transient, members)].sum(axis=1)
        absorption = scipy.linalg.solve(fundamental, into_class)
        gain = gain + absorption[pos] * class_gain

    return ChainEvaluation(gain=gain, n_closed_classes=len(classes))


def evaluate_policy_exact(dynamics, state_space, start=0):
    '''
    Exact per-device long-run throughputs (bits per slot) of a policy from its dynamics,
    started with empty batteries.

    :return: ChainEvaluation with gain = array([G1, G2])
    '''
    n_pairs = state_space.n_battery_pairs
    n_ch = state_space.n_channel_states
    chain = battery_chain(dynamics.next_pair.reshape(n_pairs, n_ch), n_pairs)
    rewards = np.stack([dynamics.rate1.reshape(n_pairs, n_ch).mean(axis=1),
                        dynamics.rate2.reshape(n_pairs, n_ch).mean(axis=1)], axis=1)
    return long_run_average(chain, rewards, start=start)
