import numpy as np

from wpcn_mdp.experiments.base_experiment import BaseExperiment, Job

DEFAULT_ALPHAS = [float(a) for a in np.linspace(0.0, 1.0, 11)]


class RegionExperiment(BaseExperiment):
    '''
    Throughput region: for every mode and weight alpha, the optimal policy's per-device
    throughputs (G1, G2) and the weighted gain it optimizes.
    '''

    columns = ["G1", "G2", "weighted_gain", "iterations"]

    @property
    def alphas(self):
        return list(self.spec.values) or DEFAULT_ALPHAS

    def build_jobs(self):
        jobs = []
        for mode_spec in self.spec.mode_specs:
            params = mode_spec.apply(self.base_params)
            for alpha in self.alphas:
                jobs.append(Job(label=f"{mode_spec.label} alpha={alpha:g}",
                                mode_spec=mode_spec,
                                params=params.with_overrides(alpha=alpha),
                                key={"mode": mode_spec.label, "alpha": alpha}))
        return jobs

    def evaluate(self, job):
        result = self.solve(job)
        g1, g2 = self.throughputs(result, job.params)
        return {"G1": g1,
                "G2": g2,
                "weighted_gain": result.gain / job.params.slot_length_T,
                "iterations": result.iterations}
