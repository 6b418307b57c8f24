from wpcn_mdp.experiments.base_experiment import BaseExperiment, Job

# experiment kind -> swept config key
SWEPT_KEYS = {
    "sweep-beta": "beta",
    "sweep-pmax": "p_max_dbm",
    "sweep-d1": "d1_m",
    "sweep-zeta1": "zeta1_j",
}

# Discretization the power and distance sweeps switch to with --calibrated.
# pmax: two fading bins put D1's 10 dBm harvest just over one quantum in the upper bin.
# d1: a 0.1 s recharge portion for D1 also fits one quantum of D2 uplink under full duplex.
SWEEP_CALIBRATION = {
    "sweep-pmax": {"channel_bins": 1},
    "sweep-d1": {"tau_grid_steps": 20},
}


class SweepExperiment(BaseExperiment):
    '''
    Optimal gain against one swept parameter. The batteries keep their base sizing: a beta
    sweep leaves beta_ref_battery alone and a d1 sweep pins D1's battery to the base distance.
    '''

    columns = ["gain", "iterations", "span"]

    def __init__(self, spec, container):
        super().__init__(spec, container)
        if spec.calibrated:
            self.base_params = self.base_params.with_overrides(**SWEEP_CALIBRATION.get(spec.kind, {}))

    @property
    def key(self):
        return SWEPT_KEYS[self.spec.kind]

    def overrides(self, value):
        overrides = {self.key: value}
        if self.key == "d1_m":
            device = self.base_params.devices[0]
            ref = device.battery_ref_distance_m if device.battery_ref_distance_m is not None else device.distance_m
            overrides["battery_ref_d1_m"] = ref
        return overrides

    def build_jobs(self):
        jobs = []
        for mode_spec in self.spec.mode_specs:
            params = mode_spec.apply(self.base_params)
            for value in self.spec.values:
                jobs.append(Job(label=f"{mode_spec.label} {self.key}={value:g}",
                                mode_spec=mode_spec,
                                params=params.with_overrides(**self.overrides(value)),
                                key={"mode": mode_spec.label, self.key: value}))
        return jobs

    def evaluate(self, job):
        result = self.solve(job)
        return {"gain": result.gain / job.params.slot_length_T,
                "iterations": result.iterations,
                "span": result.span}
