import io
import os
import sys

import numpy as np
import pandas as pd

from wpcn_mdp.params import ConfigurationError
from wpcn_mdp.solver.base_solver import SolveResult
from wpcn_mdp.solver.policy import Policy
from wpcn_mdp.solver.state_space import StateSpace

SOLVE_RESULT_MAGIC = "wpcn-solve-result v1"
SOLVE_RESULT_COLUMNS = ["b1", "b2", "kg1", "kg2", "kh1", "kh2", "value",
                        "tau0", "tau1", "tau2", "p0", "p1", "p2", "e1", "e2"]


class ResultContainer():
    ''' Wraps file io for experiment outputs. Tables are written as CSV with a leading comment
    line carrying the parameter hash and tool version, solve results as the versioned flat
    record file. Users receive tables as dataframes and solve results as SolveResult objects.

    An `out` of None or "-" sends tables to stdout.
    '''

    def __init__(self, out=None, version="", float_digits=12):
        self.out = out
        self.version = version
        self.float_digits = float_digits

    @property
    def to_stdout(self):
        return self.out in (None, "-")

    ##########
    # CSV tables
    ##########

    def render_table(self, df, params_hash):
        buffer = io.StringIO()
        buffer.write(f"# params_hash={params_hash} version={self.version}\n")
        df.to_csv(buffer, index=False, float_format=f"%.{self.float_digits}g")
        return buffer.getvalue()

    def write_table(self, df, params_hash):
        text = self.render_table(df, params_hash)

        if self.to_stdout:
            sys.stdout.write(text)
            sys.stdout.flush()
            return

        os.makedirs(os.path.dirname(os.path.abspath(self.out)), exist_ok=True)
        with open(self.out, 'w') as f:
            f.write(text)

    @staticmethod
    def read_table(path):
        with open(path, 'r') as f:
            header = f.readline().lstrip("# ").split()
        meta = dict(field.split("=", 1) for field in header)
        return pd.read_csv(path, comment=None, skiprows=1), meta

    ##########
    # Solve results
    ##########

    @staticmethod
    def solve_result_frame(result):
        space = result.policy.state_space
        states = np.array(list(space), dtype=np.int64)
        defined = result.policy.defined
        values = result.values if result.values is not None else np.full(len(space), np.nan)

        df = pd.DataFrame(states[defined], columns=SOLVE_RESULT_COLUMNS[:6])
        df["value"] = values[defined]
        for k in range(3):
            df[f"tau{k}"] = result.policy.tau[defined, k]
        for k in range(3):
            df[f"p{k}"] = result.policy.p[defined, k]
        df["e1"] = result.policy.e[defined, 0]
        df["e2"] = result.policy.e[defined, 1]
        return df

    def write_solve_result(self, result, path):
        '''
        Header lines (magic, params hash, mode, gain, iterations), then one record per state:
        state tuple, relative value and action. Floats use 17 significant digits so every
        value reads back bit-exact.
        '''
        buffer = io.StringIO()
        buffer.write(f"# {SOLVE_RESULT_MAGIC}\n")
        buffer.write(f"# params_hash {result.params_hash}\n")
        buffer.write(f"# mode {result.mode}\n")
        buffer.write(f"# gain {result.gain!r}\n")
        buffer.write(f"# iterations {result.iterations}\n")
        buffer.write(f"# span {result.span!r}\n")
        buffer.write("# " + " ".join(SOLVE_RESULT_COLUMNS) + "\n")
        self.solve_result_frame(result).to_csv(buffer, sep=" ", index=False, header=False,
                                               float_format="%.17g", na_rep="nan")

        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, 'w') as f:
            f.write(buffer.getvalue())

    @staticmethod
    def read_solve_result(path, params, check_hash=True):
        '''
        :param params: SystemParams the result was solved for; defines the state space
        :param check_hash: refuse a file solved under different parameters
        :return: SolveResult (wall_time is not stored and reads back as nan)
        '''
        meta = {}
        with open(path, 'r') as f:
            first = f.readline().strip()
            if first != f"# {SOLVE_RESULT_MAGIC}":
                raise ConfigurationError(f"{path}: not a solve result file (header {first!r})")
            for line in f:
                if not line.startswith("#"):
                    break
                parts = line[1:].split(None, 1)
                if len(parts) == 2:
                    meta[parts[0]] = parts[1].strip()

        if check_hash and meta.get("params_hash") != params.params_hash():
            raise ConfigurationError(f"{path}: solved for params_hash {meta.get('params_hash')}, "
                                     f"config has {params.params_hash()}")

        records = pd.read_csv(path, sep=" ", comment="#", header=None, names=SOLVE_RESULT_COLUMNS,
                              float_precision="round_trip")

        space = StateSpace(params)
        index = np.array([space.index(s) for s in records[SOLVE_RESULT_COLUMNS[:6]].itertuples(index=False)],
                         dtype=np.int64)
        policy = Policy.empty(space)
        policy.tau[index] = records[["tau0", "tau1", "tau2"]].to_numpy()
        policy.p[index] = records[["p0", "p1", "p2"]].to_numpy()
        policy.e[index] = records[["e1", "e2"]].to_numpy()
        policy.defined[index] = True

        values = np.full(len(space), np.nan)
        values[index] = records["value"].to_numpy()
        if np.isnan(values).all():
            values = None

        span = float(meta.get("span", "nan"))
        gain = float(meta["gain"])
        return SolveResult(gain=gain,
                           values=values,
                           policy=policy,
                           iterations=int(meta["iterations"]),
                           span=span,
                           gain_bounds=(gain, gain),
                           wall_time=float("nan"),
                           mode=meta["mode"],
                           params_hash=meta["params_hash"])
