'''
Forward simulation of a policy over many slots, giving the per-device long-run throughputs
G1 and G2 that the throughput region and the parameter sweeps report.
'''
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from wpcn_mdp.channel import sample_bin, sample_fade
from wpcn_mdp.params import ConfigurationError, ContractViolation
from wpcn_mdp.solver import get_solver
from wpcn_mdp.solver.markov_chain import evaluate_policy_exact
from wpcn_mdp.solver.policy import PolicyLookupError, policy_dynamics
from wpcn_mdp.wpcn_core import QUANTA_ROUNDING, device_rate, harvest_exposure

logger = logging.getLogger(__name__)

FIDELITIES = ("discrete", "continuous")
N_BATCHES = 50


@dataclass(frozen=True)
class EvalReport:
    # bits per second
    g1: float
    g2: float
    weighted: float
    # weighted average over the last half of the horizon
    tail_weighted: float
    # batch-means standard error of `weighted`
    std_error: float
    horizon_K: int
    seed: int
    fidelity: str
    alpha: float
    initial_batteries: Tuple[int, int] = (0, 0)
    min_batteries: Tuple[int, int] = (0, 0)
    max_batteries: Tuple[int, int] = (0, 0)

    def as_row(self):
        return {"G1": self.g1, "G2": self.g2, "weighted": self.weighted, "tail_weighted": self.tail_weighted,
                "std_error": self.std_error, "horizon": self.horizon_K, "seed": self.seed,
                "fidelity": self.fidelity}


class ThroughputPair(NamedTuple):
    g1: float
    g2: float


def batch_means_error(series, n_batches=N_BATCHES):
    '''
    Standard error of the mean of a correlated series from the spread of batch means.
    NaN when the series is too short to fill every batch.
    '''
    size = len(series) // n_batches
    if size == 0:
        return float("nan")

    means = np.asarray(series[:size * n_batches]).reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))


def _channel_indices(bins_drawn, n):
    k = bins_drawn
    return ((k[:, 0] * n + k[:, 1]) * n + k[:, 2]) * n + k[:, 3]


def _walk(start_pair, channel, next_pair_of, defined, space):
    '''
    Sequential battery trajectory. `next_pair_of(t, s)` gives the battery pair after slot t
    in state s.

    :return: visited state index per slot
    '''
    n_ch = space.n_channel_states
    defined = defined.tolist()
    channel = channel.tolist()
    visited = [0] * len(channel)

    j = start_pair
    for t, c in enumerate(channel):
        s = j * n_ch + c
        if not defined[s]:
            raise PolicyLookupError(space.state(s))
        visited[t] = s
        j = next_pair_of(t, s)

    return np.array(visited, dtype=np.int64)


def simulate(policy, params, horizon_K, seed, fidelity="discrete", initial_batteries=(0, 0)):
    '''
    Runs the policy for horizon_K slots from the given batteries.

    discrete: the four bins are drawn uniformly each slot and every quantity uses the bin
    gains, exactly the model the solver optimizes.
    continuous: fades are drawn from the exponential law; the policy sees the bins they fall
    in while harvest and rates use the continuous gains.

    :param policy: Policy defined on every state the trajectory visits
    :param seed: seed of the numpy generator driving the channel draws
    :return: EvalReport
    '''
    if horizon_K < 1:
        raise ContractViolation(f"horizon_K must be >= 1, got {horizon_K}")
    if fidelity not in FIDELITIES:
        raise ConfigurationError(f"fidelity must be one of {FIDELITIES}, got {fidelity!r}")

    space = policy.state_space
    n = space.n_bins
    rng = np.random.default_rng(seed)
    start_pair = space.battery_index(*initial_batteries)

    if fidelity == "discrete":
        channel = _channel_indices(sample_bin(rng, n, size=(horizon_K, 4)), n)
        dynamics = policy_dynamics(policy, params)
        next_pair = dynamics.next_pair.tolist()
        visited = _walk(start_pair, channel, lambda t, s: next_pair[s], policy.defined, space)
        r1, r2 = dynamics.rate1[visited], dynamics.rate2[visited]
    else:
        fades = sample_fade(rng, size=(horizon_K, 4))
        channel = _channel_indices(space.bins.bin_index(fades), n)
        mean = (params.mean_gain(0), params.mean_gain(1))
        g = (mean[0] * fades[:, 0], mean[1] * fades[:, 1])
        h = (mean[0] * fades[:, 2], mean[1] * fades[:, 3])

        # per-slot quanta are floor(eta g exposure / Q); the exposure is a property of the state
        scale = [(params.devices[d].harvest_efficiency * g[d] / params.quantum(d)).tolist() for d in (0, 1)]
        exposure = [harvest_exposure(d, policy.tau, policy.p).tolist() for d in (0, 1)]
        spend = [policy.e[:, d].tolist() for d in (0, 1)]
        stored = [np.repeat(b, space.n_channel_states).tolist() for b in space.battery_levels()]
        b_cap = space.b_max

        def next_pair_of(t, s):
            levels = [min(b_cap[d], stored[d][s] - spend[d][s]
                          + math.floor(scale[d][t] * exposure[d][s] + QUANTA_ROUNDING))
                      for d in (0, 1)]
            return levels[0] * (b_cap[1] + 1) + levels[1]

        visited = _walk(start_pair, channel, next_pair_of, policy.defined, space)
        r1 = device_rate(0, policy.tau[visited], policy.p[visited], policy.e[visited], h[0], params)
        r2 = device_rate(1, policy.tau[visited], policy.p[visited], policy.e[visited], h[1], params)

    b1, b2 = space.battery_levels()
    pairs = visited // space.n_channel_states
    T = params.slot_length_T
    alpha = params.alpha
    weighted = alpha * r1 + (1.0 - alpha) * r2
    g1, g2 = float(r1.mean() / T), float(r2.mean() / T)

    report = EvalReport(g1=g1,
                        g2=g2,
                        weighted=alpha * g1 + (1.0 - alpha) * g2,
                        tail_weighted=float(weighted[horizon_K // 2:].mean() / T),
                        std_error=batch_means_error(weighted / T),
                        horizon_K=horizon_K,
                        seed=seed,
                        fidelity=fidelity,
                        alpha=alpha,
                        initial_batteries=tuple(initial_batteries),
                        min_batteries=(int(b1[pairs].min()), int(b2[pairs].min())),
                        max_batteries=(int(b1[pairs].max()), int(b2[pairs].max())))

    logger.debug("simulated %d slots (%s, seed %d): G1 %.6g, G2 %.6g bits/s", horizon_K, fidelity, seed, g1, g2)
    return report


def exact_throughputs(policy, params):
    '''
    Long-run per-device throughputs (bits/s) of a policy on the discretized model, without
    sampling.
    '''
    g1, g2 = evaluate_policy_exact(policy_dynamics(policy, params), policy.state_space).gain
    T = params.slot_length_T
    return ThroughputPair(g1=float(g1 / T), g2=float(g2 / T))


def evaluate_solution(result, params, method="simulate", horizon_K=1_000_000, seed=0):
    '''
    Per-device throughputs of a solved policy, by simulation (discrete fidelity) or exactly.
    '''
    if method == "exact":
        return exact_throughputs(result.policy, params)
    if method == "simulate":
        report = simulate(result.policy, params, horizon_K, seed, fidelity="discrete")
        return ThroughputPair(g1=report.g1, g2=report.g2)

    raise ConfigurationError(f"method must be 'simulate' or 'exact', got {method!r}")


def throughput_pair(params, mode, alpha=None, method="simulate", horizon_K=1_000_000, seed=0):
    '''
    Solves the mode at weight alpha and returns the (G1, G2) its policy achieves.

    :param alpha: overrides params.alpha when given
    :return: ThroughputPair in bits/s
    '''
    if alpha is not None:
        params = params.with_overrides(alpha=alpha)

    result = get_solver(params, mode).solve()
    return evaluate_solution(result, params, method=method, horizon_K=horizon_K, seed=seed)
