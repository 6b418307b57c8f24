from wpcn_mdp import __version__
from wpcn_mdp.experiments import EvalExperiment, ExperimentSpec, get_experiment
from wpcn_mdp.params import ConfigurationError
from wpcn_mdp.result_container import ResultContainer
from wpcn_mdp.utils import parse_float_list
import argparse
import logging
import sys

logger = logging.getLogger(__name__)

DEFAULT_MODES = {
    "region": "fd-perfect,hd",
    "maxmin": "fd-perfect,hd",
    "sweep": "fd-perfect,fd:-110,fd:-100,fd:-70,hd",
}


def build_parser():
    parser = argparse.ArgumentParser(description="Optimal long-term resource allocation for a full-duplex "
                                                 "wireless-powered network: solver and experiments. Data goes to "
                                                 "stdout (or --out), progress and diagnostics to stderr.")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Path to a 'key = value' configuration file. Unspecified keys take the default operating point.")
    common.add_argument("--gamma-db", default=None, help="Self-interference in dB, or 'perfect'. Overrides the config file.")
    common.add_argument("--alpha", default=None, help="Weight of device 1 in [0, 1]. Overrides the config file.")
    common.add_argument("--seed", type=int, default=0, help="Seed of the channel draws in simulations.")
    common.add_argument("--out", default=None, help="Output CSV path; stdout when omitted or '-'.")
    common.add_argument("--horizon", type=int, default=1_000_000, help="Simulated slots per evaluation.")
    common.add_argument("--fidelity", choices=["discrete", "continuous"], default="discrete", help="Channel model used by the simulator.")
    common.add_argument("--method", choices=["simulate", "exact"], default="simulate", help="How per-device throughputs of a solved policy are obtained.")
    common.add_argument("--jobs", type=int, default=1, help="Independent rows run in this many processes.")
    common.add_argument("--workers", type=int, default=1, help="Solver threads per row; each sweep of the value iteration is split over them.")
    common.add_argument("--timing", action='store_true', default=False, help="Add a wall_time_s column. Repeated runs then no longer produce identical files.")
    common.add_argument("--verbose", action='store_true', default=False, help="Log solver progress at debug level.")

    subparsers = parser.add_subparsers(dest="command", required=True)

    solve = subparsers.add_parser("solve", parents=[common], help="Solve one configuration, store the result file and report its simulated throughputs.")
    solve.add_argument("--mode", default="fd", help="fd, fd-perfect, fd:<gamma dB>, hd or myopic. Comma separated for several.")
    solve.add_argument("--result", default=None, help="Path of the solve result file to write.")

    evaluate = subparsers.add_parser("eval", parents=[common], help="Simulate a policy stored in a solve result file.")
    evaluate.add_argument("--mode", default="fd", help="Mode the file was solved for; its gamma override must match.")
    evaluate.add_argument("--result", required=True, help="Path of the solve result file to read.")

    region = subparsers.add_parser("region", parents=[common], help="Throughput region over a grid of alpha.")
    region.add_argument("--modes", default=DEFAULT_MODES["region"], help="Comma separated mode list.")
    region.add_argument("--values", default=None, help="Comma separated alpha values (default 11 points from 0 to 1).")

    maxmin = subparsers.add_parser("maxmin", parents=[common], help="Max-min throughput by bisection over alpha.")
    maxmin.add_argument("--modes", default=DEFAULT_MODES["maxmin"], help="Comma separated mode list.")

    sweep = subparsers.add_parser("sweep", parents=[common], help="Optimal gain against one parameter.")
    sweep.add_argument("parameter", choices=["beta", "pmax", "d1", "zeta1"], help="Swept parameter; pmax values are in dBm.")
    sweep.add_argument("--modes", default=DEFAULT_MODES["sweep"], help="Comma separated mode list.")
    sweep.add_argument("--values", required=True, help="Comma separated, increasing values.")
    sweep.add_argument("--calibrated", action='store_true', default=False, help="Run pmax and d1 on their calibrated grids (one channel bin for pmax, 20 tau steps for d1).")

    return parser


def configure_logging(verbose):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def spec_from_args(args):
    overrides = {}
    if args.gamma_db is not None:
        overrides["gamma_db"] = args.gamma_db
    if args.alpha is not None:
        overrides["alpha"] = args.alpha

    if args.command in ("solve", "eval"):
        kind, modes = "single", args.mode
    elif args.command == "sweep":
        kind, modes = f"sweep-{args.parameter}", args.modes
    else:
        kind, modes = args.command, args.modes

    values = getattr(args, "values", None)
    return ExperimentSpec(kind=kind,
                          modes=[m for m in modes.split(",") if m.strip()],
                          config_path=args.config,
                          values=parse_float_list(values) if values else [],
                          seed=args.seed,
                          out=args.out,
                          overrides=overrides,
                          horizon_K=args.horizon,
                          fidelity=args.fidelity,
                          method=args.method,
                          jobs=args.jobs,
                          workers=args.workers,
                          calibrated=getattr(args, "calibrated", False),
                          timing=args.timing,
                          solve_out=getattr(args, "result", None) if args.command == "solve" else None)


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        spec = spec_from_args(args)
        container = ResultContainer(out=spec.out, version=__version__)
        if args.command == "eval":
            experiment = EvalExperiment(spec, container, args.result)
        else:
            experiment = get_experiment(spec, container)
        _, failures = experiment.run_and_write()
    except ConfigurationError as e:
        for violation in e.violations:
            logger.error("configuration: %s", violation)
        return 2

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
