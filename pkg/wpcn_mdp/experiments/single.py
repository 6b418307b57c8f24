import logging
import os

from wpcn_mdp.experiments.base_experiment import BaseExperiment, Job
from wpcn_mdp.policy_eval import simulate

logger = logging.getLogger(__name__)


class SingleExperiment(BaseExperiment):
    '''
    Solves one configuration per mode, stores the SolveResult file and reports the simulated
    throughputs of the solved policy.
    '''

    columns = ["gain", "iterations", "span", "G1", "G2", "weighted", "tail_weighted", "std_error",
               "horizon", "seed", "fidelity"]

    def build_jobs(self):
        return [Job(label=m.label, mode_spec=m, params=m.apply(self.base_params), key={"mode": m.label})
                for m in self.spec.mode_specs]

    def solve_path(self, job):
        path = self.spec.solve_out
        if path is None or len(self.spec.modes) == 1:
            return path
        root, ext = os.path.splitext(path)
        return f"{root}_{job.mode_spec.label.replace(':', '_')}{ext}"

    def evaluate(self, job):
        result = self.solve(job)

        path = self.solve_path(job)
        if path is not None:
            self.container.write_solve_result(result, path)
            logger.info("wrote %s", path)

        report = simulate(result.policy, job.params, self.spec.horizon_K, self.spec.seed, fidelity=self.spec.fidelity)
        row = {"gain": result.gain / job.params.slot_length_T, "iterations": result.iterations, "span": result.span}
        row.update(report.as_row())
        return row


class EvalExperiment(SingleExperiment):
    '''
    Re-evaluates a stored policy: loads the SolveResult file solved for this configuration and
    simulates it.
    '''

    def __init__(self, spec, container, result_path):
        super().__init__(spec, container)
        self.result_path = result_path

    def build_jobs(self):
        mode_spec = self.spec.mode_specs[0]
        return [Job(label=f"eval {self.result_path}", mode_spec=mode_spec, params=mode_spec.apply(self.base_params),
                    key={"mode": mode_spec.label})]

    def evaluate(self, job):
        result = self.container.read_solve_result(self.result_path, job.params)
        report = simulate(result.policy, job.params, self.spec.horizon_K, self.spec.seed, fidelity=self.spec.fidelity)
        row = {"gain": result.gain / job.params.slot_length_T, "iterations": result.iterations, "span": result.span}
        row.update(report.as_row())
        return row
