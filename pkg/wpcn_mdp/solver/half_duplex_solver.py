from wpcn_mdp.action_space import OperatingMode
from wpcn_mdp.solver.base_solver import MdpSolver


class HalfDuplexSolver(MdpSolver):
    '''
    Harvest-then-transmit: the AP is silent during the uplink portions (P1 = P2 = 0), so its
    action set is a subset of the full-duplex one on the same grid and gamma never matters.
    '''
    mode = OperatingMode.HALF_DUPLEX
