__version__ = "0.1.0"

from .params import SystemParams, DeviceParams, ConfigurationError, ContractViolation, validate, load_params
from .channel import FadingBins, equal_probability_bins, bin_gain, sample_bin
from .wpcn_core import Action, BatteryLevels, IDLE
from .action_space import OperatingMode, ActionGrid, enumerate_actions, is_feasible
from .solver import get_solver, SolveResult, Policy, exact_gain_oracle
from .policy_eval import EvalReport, simulate, throughput_pair
from .result_container import ResultContainer
from .experiments import ExperimentSpec, get_experiment
