from wpcn_mdp.action_space import OperatingMode
from wpcn_mdp.solver.base_solver import MdpSolver


class FullDuplexSolver(MdpSolver):
    ''' AP keeps transferring (P1, P2) while the devices transmit; configured gamma applies '''
    mode = OperatingMode.FULL_DUPLEX
