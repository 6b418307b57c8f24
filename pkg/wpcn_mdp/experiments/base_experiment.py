import logging
import time
import traceback as tb
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import pandas as pd

from wpcn_mdp.action_space import OperatingMode
from wpcn_mdp.params import ConfigurationError, load_params, parse_gamma_db
from wpcn_mdp.policy_eval import evaluate_solution
from wpcn_mdp.solver import get_solver
from wpcn_mdp.utils import progress_bar

logger = logging.getLogger(__name__)

EXPERIMENT_KINDS = ("region", "maxmin", "sweep-beta", "sweep-pmax", "sweep-d1", "sweep-zeta1", "single")


class RowFailedException(Exception):
    def __init__(self, label, cause):
        self.label = label
        self.cause = cause
        super().__init__(f"{label}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class ModeSpec:
    '''
    One curve of an experiment: an operating mode plus the parameter overrides it implies.
    "fd" keeps the configured gamma, "fd-perfect" sets gamma = 0, "fd:-70" sets gamma in dB.
    '''
    label: str
    mode: OperatingMode
    overrides: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def parse(cls, text):
        label = text.strip()
        lowered = label.lower()

        if lowered == "fd-perfect":
            return cls(label=label, mode=OperatingMode.FULL_DUPLEX, overrides={"gamma_si": "0"})

        if lowered.startswith("fd:"):
            gamma_db = label.split(":", 1)[1]
            # fails early on unparsable values
            parse_gamma_db(gamma_db)
            return cls(label=label, mode=OperatingMode.FULL_DUPLEX, overrides={"gamma_db": gamma_db})

        return cls(label=label, mode=OperatingMode.parse(lowered))

    def apply(self, params):
        if not self.overrides:
            return params
        return params.with_overrides(**self.overrides)


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    modes: List[str]
    config_path: Optional[str] = None
    values: List[float] = field(default_factory=list)
    seed: int = 0
    out: Optional[str] = None
    # raw config overrides from the command line, e.g. {"gamma_db": "-70", "alpha": "0.5"}
    overrides: Dict[str, str] = field(default_factory=dict)
    horizon_K: int = 1_000_000
    fidelity: str = "discrete"
    # "simulate" or "exact" for the per-device throughputs
    method: str = "simulate"
    jobs: int = 1
    # solver threads per job
    workers: int = 1
    timing: bool = False
    solve_out: Optional[str] = None
    # sweep-pmax and sweep-d1 run on the grids in SWEEP_CALIBRATION
    calibrated: bool = False

    def __post_init__(self):
        violations = []
        if self.kind not in EXPERIMENT_KINDS:
            violations.append(f"experiment kind must be one of {EXPERIMENT_KINDS}, got {self.kind!r}")
        if not self.modes:
            violations.append("at least one mode is required")
        if list(self.values) != sorted(self.values):
            violations.append(f"sweep values must be sorted, got {list(self.values)}")
        if self.kind.startswith("sweep") and not self.values:
            violations.append(f"{self.kind} needs at least one value")
        if self.jobs < 1:
            violations.append(f"jobs must be >= 1, got {self.jobs}")
        if self.workers < 1:
            violations.append(f"workers must be >= 1, got {self.workers}")
        if self.calibrated and not self.kind.startswith("sweep"):
            violations.append(f"calibrated grids exist for sweeps only, not {self.kind!r}")
        if violations:
            raise ConfigurationError(violations)

    @property
    def mode_specs(self):
        return [ModeSpec.parse(m) for m in self.modes]


@dataclass(frozen=True)
class Job:
    label: str
    mode_spec: ModeSpec
    params: object
    # leading CSV columns identifying the row
    key: Dict[str, object] = field(default_factory=dict)


class BaseExperiment():
    '''
    Builds the list of independent jobs of an experiment, runs them (optionally in a process
    pool) and collects one CSV row per job in input order. A failing job leaves a row with its
    error text and the run continues.
    '''

    columns = []

    def __init__(self, spec, container):
        self.spec = spec
        self.container = container
        self.base_params = load_params(spec.config_path, **spec.overrides)

    def build_jobs(self):
        raise NotImplementedError("This is an interface")

    def evaluate(self, job):
        ''' :return: dict of result columns for one job '''
        raise NotImplementedError("This is an interface")

    def solve(self, job):
        return get_solver(job.params, job.mode_spec.mode, workers=self.spec.workers).solve()

    def throughputs(self, result, params):
        return evaluate_solution(result, params, method=self.spec.method,
                                 horizon_K=self.spec.horizon_K, seed=self.spec.seed)

    def safe_evaluate(self, job):
        start = time.perf_counter()
        row = dict(job.key)
        row.update({c: None for c in self.columns})

        try:
            row.update(self.evaluate(job))
            row["error"] = ""
        except Exception as e:
            failure = RowFailedException(job.label, e)
            logger.debug("".join(tb.format_exception(type(e), e, e.__traceback__)))
            logger.warning("row failed: %s", failure)
            row["error"] = str(failure)

        wall_time = time.perf_counter() - start
        logger.info("%s done in %.2fs", job.label, wall_time)
        if self.spec.timing:
            row["wall_time_s"] = wall_time
        return row

    @progress_bar("rows")
    def collect_rows(self, jobs):
        rows = []

        if self.spec.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.spec.jobs) as pool:
                futures = [pool.submit(self.safe_evaluate, job) for job in jobs]
                for i, future in enumerate(futures):
                    yield i / len(jobs)
                    rows.append(future.result())
        else:
            for i, job in enumerate(jobs):
                yield i / len(jobs)
                rows.append(self.safe_evaluate(job))

        yield 1
        return rows

    def run(self):
        '''
        :return: (DataFrame of rows, number of failed rows)
        '''
        jobs = self.build_jobs()
        rows = self.collect_rows(jobs)

        df = pd.DataFrame(rows)
        # error last, after any timing column
        df = df[[c for c in df.columns if c != "error"] + ["error"]]
        failures = int((df["error"] != "").sum())
        if failures:
            logger.warning("%d of %d rows failed", failures, len(df))
        return df, failures

    def run_and_write(self):
        df, failures = self.run()
        self.container.write_table(df, self.base_params.params_hash())
        return df, failures
