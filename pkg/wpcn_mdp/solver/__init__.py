from .state_space import StateSpace, MdpState, StateSpaceTooLarge
from .policy import Policy, PolicyDynamics, PolicyLookupError, policy_dynamics
from .markov_chain import ChainEvaluation, ReducibleChainError, evaluate_policy_exact, long_run_average
from .base_solver import MdpSolver, SolveResult, ConvergenceError
from .full_duplex_solver import FullDuplexSolver
from .half_duplex_solver import HalfDuplexSolver
from .myopic_solver import MyopicSolver
from .oracle import OracleRefused, OracleResult, exact_gain_oracle

from wpcn_mdp.action_space import OperatingMode


def get_solver(params, mode, **kwargs):
    mode = OperatingMode.parse(mode)

    if mode is OperatingMode.FULL_DUPLEX:
        return FullDuplexSolver(params, **kwargs)

    elif mode is OperatingMode.HALF_DUPLEX:
        return HalfDuplexSolver(params, **kwargs)

    elif mode is OperatingMode.MYOPIC:
        return MyopicSolver(params, **kwargs)

    raise NotImplementedError(f"Mode {mode} Not Supported")


def build_state_space(params):
    return StateSpace(params)


def relative_value_iteration(params, mode, **kwargs):
    return get_solver(params, mode, **kwargs).relative_value_iteration()


def myopic_policy(params):
    return MyopicSolver(params).myopic_policy()
