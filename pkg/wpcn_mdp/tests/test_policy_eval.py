import math

import numpy as np
import pytest

from wpcn_mdp.params import ConfigurationError, ContractViolation
from wpcn_mdp.policy_eval import (batch_means_error, evaluate_solution, exact_throughputs, simulate,
                                  throughput_pair)
from wpcn_mdp.solver import Policy, PolicyLookupError, StateSpace, relative_value_iteration
from wpcn_mdp.wpcn_core import IDLE, Action


@pytest.fixture
def solved(small_params):
    return relative_value_iteration(small_params, "fd")


class TestSimulate:

    def test_idle_policy(self, small_params):
        policy = Policy.constant(StateSpace(small_params), IDLE)
        report = simulate(policy, small_params, horizon_K=1000, seed=0)
        assert report.g1 == 0.0 and report.g2 == 0.0
        assert report.max_batteries == (0, 0)

    def test_deterministic_for_a_seed(self, small_params, solved):
        first = simulate(solved.policy, small_params, horizon_K=5000, seed=3)
        second = simulate(solved.policy, small_params, horizon_K=5000, seed=3)
        other = simulate(solved.policy, small_params, horizon_K=5000, seed=4)
        assert first == second
        assert (first.g1, first.g2) != (other.g1, other.g2)

    def test_weighted_total(self, small_params, solved):
        report = simulate(solved.policy, small_params, horizon_K=5000, seed=1)
        alpha = small_params.alpha
        assert report.weighted == pytest.approx(alpha * report.g1 + (1 - alpha) * report.g2, rel=1e-12)
        assert report.as_row()["horizon"] == 5000

    def test_batteries_stay_in_range(self, small_params, solved):
        report = simulate(solved.policy, small_params, horizon_K=5000, seed=2, initial_batteries=(3, 3))
        assert report.initial_batteries == (3, 3)
        assert min(report.min_batteries) >= 0
        assert report.max_batteries[0] <= 3 and report.max_batteries[1] <= 3

    def test_undefined_state(self, small_params):
        space = StateSpace(small_params)
        policy = Policy.empty(space)
        charge = Action(tau=(1.0, 0.0, 0.0), p=(2.0, 0.0, 0.0), e=(0, 0))
        for c in range(space.n_channel_states):
            policy[c] = charge
        with pytest.raises(PolicyLookupError):
            simulate(policy, small_params, horizon_K=100, seed=0)

    def test_matches_value_iteration(self, small_params, solved):
        report = simulate(solved.policy, small_params, horizon_K=200_000, seed=7)
        assert report.weighted == pytest.approx(solved.gain / small_params.slot_length_T, rel=0.02)
        assert report.std_error < 0.02 * report.weighted

    def test_error_shrinks_with_horizon(self, small_params, solved):
        short = simulate(solved.policy, small_params, horizon_K=10_000, seed=11)
        long = simulate(solved.policy, small_params, horizon_K=160_000, seed=12)
        # sixteen times the slots, a quarter of the error
        assert 4 / 1.5 < short.std_error / long.std_error < 4 * 1.5

    def test_continuous_fidelity(self, small_params, solved):
        report = simulate(solved.policy, small_params, horizon_K=50_000, seed=5, fidelity="continuous")
        assert report.fidelity == "continuous"
        assert report.g1 > 0 and report.g2 > 0
        assert report.max_batteries[0] <= 3 and report.max_batteries[1] <= 3
        again = simulate(solved.policy, small_params, horizon_K=50_000, seed=5, fidelity="continuous")
        assert again == report

    def test_bad_arguments(self, small_params, solved):
        with pytest.raises(ContractViolation):
            simulate(solved.policy, small_params, horizon_K=0, seed=0)
        with pytest.raises(ConfigurationError):
            simulate(solved.policy, small_params, horizon_K=10, seed=0, fidelity="rayleigh")


class TestExact:

    def test_exact_matches_gain(self, small_params, solved):
        g1, g2 = exact_throughputs(solved.policy, small_params)
        alpha = small_params.alpha
        assert alpha * g1 + (1 - alpha) * g2 == pytest.approx(solved.gain / small_params.slot_length_T, rel=1e-4)

    def test_evaluate_solution_methods(self, small_params, solved):
        exact = evaluate_solution(solved, small_params, method="exact")
        sampled = evaluate_solution(solved, small_params, method="simulate", horizon_K=100_000, seed=0)
        assert sampled.g1 == pytest.approx(exact.g1, rel=0.05)
        assert sampled.g2 == pytest.approx(exact.g2, rel=0.05)
        with pytest.raises(ConfigurationError):
            evaluate_solution(solved, small_params, method="guess")

    def test_extreme_weights_silence_a_device(self, small_params):
        only_first = throughput_pair(small_params, "fd", alpha=1.0, method="exact")
        assert only_first.g1 > 0 and only_first.g2 == 0.0
        only_second = throughput_pair(small_params, "fd", alpha=0.0, method="exact")
        assert only_second.g2 > 0 and only_second.g1 == 0.0


def test_batch_means_error():
    assert math.isnan(batch_means_error(np.ones(10)))
    assert batch_means_error(np.full(1000, 3.0)) == 0.0
    noisy = np.random.default_rng(0).normal(size=100_000)
    assert batch_means_error(noisy) == pytest.approx(1 / math.sqrt(100_000), rel=0.3)


@pytest.mark.slow
def test_default_instance_long_run(default_params):
    solved = relative_value_iteration(default_params, "fd")
    report = simulate(solved.policy, default_params, horizon_K=1_000_000, seed=0)
    assert report.weighted == pytest.approx(solved.gain / default_params.slot_length_T, rel=0.01)
    assert report.tail_weighted == pytest.approx(report.weighted, rel=0.02)
    assert min(report.min_batteries) >= 0
    assert report.max_batteries[0] <= default_params.b_max(0)
    assert report.max_batteries[1] <= default_params.b_max(1)
