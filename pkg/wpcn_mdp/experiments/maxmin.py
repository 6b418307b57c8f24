import logging

from wpcn_mdp.experiments.base_experiment import BaseExperiment, Job

logger = logging.getLogger(__name__)

# stop when |G1 - G2| is below this fraction of max(G1, G2), or the bracket is this narrow
RELATIVE_TOLERANCE = 0.01
ALPHA_TOLERANCE = 1e-3


class BisectionError(RuntimeError):
    def __init__(self, low, high):
        self.low = low
        self.high = high
        super().__init__(f"G1 - G2 does not change sign on [0, 1]: "
                         f"{low[1] - low[2]:.6g} at alpha=0, {high[1] - high[2]:.6g} at alpha=1")


class MaxMinExperiment(BaseExperiment):
    '''
    Max-min throughput: bisects alpha until both devices get the same long-run throughput.
    G1 - G2 is nondecreasing in alpha, negative at alpha = 0 and positive at alpha = 1.
    '''

    columns = ["alpha_star", "G1", "G2", "common_throughput", "evaluations"]

    def build_jobs(self):
        return [Job(label=f"{m.label} maxmin", mode_spec=m, params=m.apply(self.base_params), key={"mode": m.label})
                for m in self.spec.mode_specs]

    def pair_at(self, job, alpha):
        params = job.params.with_overrides(alpha=alpha)
        g1, g2 = self.throughputs(self.solve(Job(job.label, job.mode_spec, params)), params)
        logger.debug("%s: alpha %.6g -> G1 %.6g, G2 %.6g", job.label, alpha, g1, g2)
        return alpha, g1, g2

    def evaluate(self, job):
        points = []

        def evaluate_at(alpha):
            point = self.pair_at(job, alpha)
            points.append(point)
            return point

        low, high = evaluate_at(0.0), evaluate_at(1.0)
        if not (low[1] - low[2] <= 0 <= high[1] - high[2]):
            raise BisectionError(low, high)

        while high[0] - low[0] >= ALPHA_TOLERANCE:
            mid = evaluate_at((low[0] + high[0]) / 2)
            difference = mid[1] - mid[2]
            if abs(difference) < RELATIVE_TOLERANCE * max(mid[1], mid[2]):
                break
            if difference < 0:
                low = mid
            else:
                high = mid

        # G1 - G2 moves in steps between policies; keep the fairest point evaluated
        alpha, g1, g2 = max(points, key=lambda p: min(p[1], p[2]))
        return {"alpha_star": alpha,
                "G1": g1,
                "G2": g2,
                "common_throughput": min(g1, g2),
                "evaluations": len(points)}
