from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest

from wpcn_mdp.action_space import is_feasible
from wpcn_mdp.params import ContractViolation, validate
from wpcn_mdp.solver import (ConvergenceError, FullDuplexSolver, HalfDuplexSolver, MdpState, MyopicSolver, Policy,
                             ReducibleChainError, StateSpace, StateSpaceTooLarge, build_state_space,
                             evaluate_policy_exact, get_solver, long_run_average, myopic_policy, policy_dynamics,
                             relative_value_iteration)
from wpcn_mdp.solver import base_solver
from wpcn_mdp.solver.markov_chain import battery_chain, closed_classes, stationary_distribution
from wpcn_mdp.wpcn_core import IDLE, Action, slot_reward


class TestStateSpace:

    def test_default_count(self, default_params):
        assert len(StateSpace(default_params)) == 1936

    def test_build_state_space(self, small_params):
        space = build_state_space(small_params)
        assert len(space) == 16 * 16
        assert space.n_battery_pairs == 16 and space.n_channel_states == 16

    def test_minimal_count(self):
        assert len(StateSpace(validate({"b1_max": 1, "b2_max": 1, "channel_bins": 1}))) == 4

    def test_round_trip(self, small_params):
        space = StateSpace(small_params)
        assert [space.index(space.state(i)) for i in range(len(space))] == list(range(len(space)))
        assert space.state(space.reference_index) == (0, 0, 0, 0, 0, 0)

    def test_out_of_grid(self, small_params):
        space = StateSpace(small_params)
        with pytest.raises(ContractViolation):
            space.index((4, 0, 0, 0, 0, 0))
        with pytest.raises(ContractViolation):
            space.index((0, 0, 0, 0, 2, 0))
        with pytest.raises(ContractViolation):
            space.state(len(space))

    def test_too_large(self):
        with pytest.raises(StateSpaceTooLarge) as info:
            StateSpace(validate({"max_states": 100}))
        assert info.value.count == 1936


class TestTransitions:

    def test_probabilities_sum_to_one(self, small_params):
        solver = FullDuplexSolver(small_params)
        action = Action(tau=(0.2, 0.4, 0.4), p=(2.0, 2.0, 2.0), e=(1, 1))
        transition = solver.successor((2, 3, 1, 0, 1, 1), action)
        probabilities = [p for _, p in transition.successors]
        assert len(probabilities) == 16
        assert all(p == Fraction(1, 16) for p in probabilities)
        assert sum(probabilities) == 1

    def test_idle_keeps_batteries(self, small_params):
        solver = FullDuplexSolver(small_params)
        transition = solver.successor((2, 1, 0, 1, 0, 1), IDLE)
        assert transition.batteries == (2, 1)
        assert all((s.b1, s.b2) == (2, 1) for s, _ in transition.successors)

    def test_infeasible_action(self, small_params):
        solver = FullDuplexSolver(small_params)
        with pytest.raises(ContractViolation):
            solver.successor((0, 0, 0, 0, 0, 0), Action(tau=(0.5, 0.5, 0.0), p=(2.0, 0.0, 0.0), e=(1, 0)))

    def test_block_matches_successor(self, small_params):
        solver = FullDuplexSolver(small_params)
        space = solver.state_space
        j = space.battery_index(3, 2)
        block = solver.blocks[j]
        for c in range(space.n_channel_states):
            state = (3, 2) + space.channel_state(c)
            g_combo = c // space.n_bins ** 2
            for a in range(0, len(block.table), 37):
                expected = solver.successor(state, block.table.action(a)).batteries
                assert space.battery_pair(block.next_pair[g_combo, a]) == expected

    @pytest.mark.parametrize("mode", ["fd", "hd"])
    def test_block_reward_matches_slot_reward(self, small_params, mode):
        solver = get_solver(small_params.with_overrides(alpha=0.3), mode)
        space = solver.state_space
        for b1, b2 in [(0, 0), (3, 2), (1, 3)]:
            block = solver.blocks[space.battery_index(b1, b2)]
            for c in range(0, space.n_channel_states, 3):
                state = MdpState(b1, b2, *space.channel_state(c))
                h_combo = c % space.n_bins ** 2
                h1, h2 = space.bin_gains(0)[state.k_h1], space.bin_gains(1)[state.k_h2]
                for a in range(0, len(block.table), 11):
                    expected = slot_reward(h1, h2, block.table.action(a), solver.params)
                    assert block.reward[h_combo, a] == pytest.approx(expected, rel=1e-12, abs=1e-9)


class TestBellmanBackup:

    def test_empty_batteries_zero_values(self, small_params):
        solver = FullDuplexSolver(small_params)
        value, action = solver.bellman_backup((0, 0, 0, 0, 0, 0), np.zeros(len(solver.state_space)))
        assert value == 0.0
        assert action.e == (0, 0)

    def test_constant_shift(self, small_params):
        solver = FullDuplexSolver(small_params)
        values = np.random.default_rng(1).normal(size=len(solver.state_space)) * 1e5
        for state in [(0, 0, 0, 0, 0, 0), (3, 1, 1, 0, 1, 1), (2, 3, 0, 1, 1, 0)]:
            value, action = solver.bellman_backup(state, values)
            shifted_value, shifted_action = solver.bellman_backup(state, values + 12345.0)
            assert shifted_action == action
            assert shifted_value == pytest.approx(value + 12345.0, rel=1e-12)

    def test_degenerate_instance(self, empty_battery_params):
        solver = FullDuplexSolver(empty_battery_params)
        assert len(solver.state_space) == 1
        value, _ = solver.bellman_backup((0, 0, 0, 0, 0, 0), np.zeros(1))
        assert value == 0.0


class TestRelativeValueIteration:

    def test_converges(self, small_params):
        result = FullDuplexSolver(small_params).solve()
        assert result.gain > 0
        assert result.values[0] == 0.0
        assert result.span <= small_params.rvi_tolerance * max(abs(b) for b in result.gain_bounds)
        assert result.gain_bounds[0] <= result.gain <= result.gain_bounds[1]
        assert len(result.spans) == result.iterations
        assert result.policy.is_total

    def test_policy_is_feasible(self, small_params):
        result = HalfDuplexSolver(small_params).solve()
        space = result.policy.state_space
        for idx in range(0, len(space), 7):
            state = space.state(idx)
            assert is_feasible(result.policy[idx], (state.b1, state.b2), small_params, "hd")[0]

    def test_full_duplex_dominates(self, small_params):
        fd = relative_value_iteration(small_params, "fd")
        hd = relative_value_iteration(small_params, "hd")
        assert fd.gain >= hd.gain * (1 - 1e-9)

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_extreme_weights_match_half_duplex(self, small_params, alpha):
        params = small_params.with_overrides(alpha=alpha)
        fd = get_solver(params, "fd").solve()
        hd = get_solver(params, "hd").solve()
        assert fd.gain == pytest.approx(hd.gain, rel=0.01)

    def test_initial_values_irrelevant(self, small_params):
        solver = FullDuplexSolver(small_params)
        zero = solver.solve()
        noisy = solver.solve(initial_values=np.random.default_rng(4).normal(size=len(solver.state_space)) * 1e6)
        assert noisy.gain == pytest.approx(zero.gain, rel=2 * small_params.rvi_tolerance)

    def test_workers_bit_identical(self, small_params):
        serial = FullDuplexSolver(small_params).solve()
        threaded = FullDuplexSolver(small_params, workers=3).solve()
        assert np.array_equal(serial.values, threaded.values)
        assert serial.gain == threaded.gain
        assert np.array_equal(serial.policy.e, threaded.policy.e)

    def test_one_thread_pool_per_run(self, small_params, monkeypatch):
        created = []

        class CountingPool(ThreadPoolExecutor):
            def __init__(self, *args, **kwargs):
                created.append(kwargs.get("max_workers"))
                super().__init__(*args, **kwargs)

        monkeypatch.setattr(base_solver, "ThreadPoolExecutor", CountingPool)
        result = FullDuplexSolver(small_params, workers=2).solve()
        assert result.iterations > 1
        assert created == [2]

        FullDuplexSolver(small_params).solve()
        assert created == [2]

    def test_iteration_cap(self, small_params):
        with pytest.raises(ConvergenceError) as info:
            FullDuplexSolver(small_params.with_overrides(rvi_max_iterations=3)).solve()
        assert info.value.iterations == 3
        assert len(info.value.spans) == 3
        assert info.value.last_span > 0

    def test_deterministic_channel_instance(self, tiny_params):
        result = FullDuplexSolver(tiny_params).solve()
        assert result.gain > 0
        assert result.policy.is_total

    def test_degenerate_instance(self, empty_battery_params):
        result = FullDuplexSolver(empty_battery_params).solve()
        assert result.gain == 0.0


class TestMyopic:

    def test_empty_batteries_do_not_spend(self, small_params):
        policy = myopic_policy(small_params)
        space = policy.state_space
        for c in range(space.n_channel_states):
            action = policy[space.battery_index(0, 0) * space.n_channel_states + c]
            assert action.e == (0, 0)
            assert action.tau[0] > 0 and action.p[0] == small_params.p_max

    def test_spends_what_airtime_allows(self, small_params):
        policy = myopic_policy(small_params)
        space = policy.state_space
        for idx in range(len(space)):
            state = space.state(idx)
            action = policy[idx]
            for device, b in ((0, state.b1), (1, state.b2)):
                spend = action.e[device]
                one_more = (spend + 1) * small_params.quantum(device)
                assert spend == b or one_more > small_params.rho_max(device) * action.tau[device + 1] * (1 + 1e-9)

    def test_below_optimal(self, small_params):
        myopic = MyopicSolver(small_params).solve()
        optimal = FullDuplexSolver(small_params).solve()
        assert myopic.values is None
        assert 0 < myopic.gain <= optimal.gain * (1 + 1e-6)

    def test_empty_battery_instance(self, empty_battery_params):
        assert MyopicSolver(empty_battery_params).solve().gain == 0.0


class TestMarkovChain:

    def test_stationary_two_states(self):
        chain = np.array([[0.9, 0.1], [0.5, 0.5]])
        assert stationary_distribution(chain) == pytest.approx([5 / 6, 1 / 6], rel=1e-12)

    def test_reducible_detected(self):
        chain = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert len(closed_classes(chain)) == 2
        with pytest.raises(ReducibleChainError):
            stationary_distribution(chain)

    def test_absorption_mixes_class_gains(self):
        chain = np.array([[0.0, 0.5, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        evaluation = long_run_average(chain, np.array([0.0, 1.0, 3.0]), start=0)
        assert evaluation.n_closed_classes == 2
        assert evaluation.gain == pytest.approx(2.0, rel=1e-12)
        assert long_run_average(chain, np.array([0.0, 1.0, 3.0]), start=2).gain == pytest.approx(3.0)

    def test_battery_chain_rows(self):
        next_pair = np.array([[0, 1, 1, 2], [2, 2, 2, 2], [0, 0, 1, 1]])
        chain = battery_chain(next_pair, 3)
        assert chain.sum(axis=1) == pytest.approx([1.0, 1.0, 1.0])
        assert chain[0].tolist() == [0.25, 0.5, 0.25]

    def test_idle_policy_gain(self, small_params):
        policy = Policy.constant(StateSpace(small_params), IDLE)
        evaluation = evaluate_policy_exact(policy_dynamics(policy, small_params), policy.state_space)
        assert evaluation.gain.tolist() == [0.0, 0.0]
