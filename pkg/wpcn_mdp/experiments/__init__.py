from .base_experiment import ExperimentSpec, ModeSpec, RowFailedException, BaseExperiment
from .region import RegionExperiment
from .maxmin import MaxMinExperiment, BisectionError
from .sweep import SweepExperiment, SWEEP_CALIBRATION
from .single import SingleExperiment, EvalExperiment


def get_experiment(spec, container):
    if spec.kind == "region":
        return RegionExperiment(spec, container)

    elif spec.kind == "maxmin":
        return MaxMinExperiment(spec, container)

    elif spec.kind.startswith("sweep-"):
        return SweepExperiment(spec, container)

    elif spec.kind == "single":
        return SingleExperiment(spec, container)

    raise NotImplementedError(f"Experiment {spec.kind} Not Supported")


def run_region(spec, container):
    return RegionExperiment(spec, container).run_and_write()


def run_maxmin(spec, container):
    return MaxMinExperiment(spec, container).run_and_write()


def run_sweep(spec, container):
    return SweepExperiment(spec, container).run_and_write()


def run_single(spec, container):
    return SingleExperiment(spec, container).run_and_write()
