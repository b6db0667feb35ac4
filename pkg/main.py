import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from src.monitoring.diagnostics import component_names
from src.runner.run import run_convergence, run_scenario
from src.runner.verify import DEFAULT_SAMPLES, run_property_suite
from src.utils.config import DEFAULT_CONFIG_PATH, RunConfig, load_config
from src.utils.errors import ConfigurationError, SolverError

load_dotenv()

# Set up logging
logging.basicConfig(level=logging.INFO, format="%(asctime)s:%(levelname)s:%(message)s")
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_PROPERTY = 3


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", default=None, help="example1 .. example4")
    parser.add_argument("--moments", "-N", type=int, default=None, help="number of moments N")
    parser.add_argument("--degree", "-P", type=int, default=None, help="polynomial degree P")
    parser.add_argument("--elements", "-K", type=int, default=None, help="number of elements K")
    parser.add_argument("--cfl", type=float, default=None)
    parser.add_argument("--dt", type=float, default=None, help="fixed time step")
    parser.add_argument("--t-end", type=float, default=None)
    parser.add_argument("--flux", choices=["ec", "es", "rusanov"], default=None)
    parser.add_argument("--friction", choices=["none", "slip", "manning"], default=None)
    parser.add_argument("--nu", type=float, default=None, help="friction coefficient")
    parser.add_argument("--model", choices=["swme", "swlme"], default=None)
    parser.add_argument(
        "--shock-capture", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument(
        "--well-balanced",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="example4 only: ES flux (default) or the naive Rusanov comparison",
    )
    parser.add_argument("--output", default=None, help="output directory")
    parser.add_argument("--snapshots", type=int, default=None, help="snapshot count")
    parser.add_argument("--dump-tensors", default=None, metavar="PATH")
    parser.add_argument("--track", action="store_true", help="log the run to MLflow")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Entropy stable DGSEM solver for the shallow water moment equations"
    )
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="YAML run configuration")
    parser.add_argument("--seed", type=int, default=None)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", "-q", action="store_true", help="warnings only, no bar")
    verbosity.add_argument("--verbose", "-v", action="store_true")

    commands = parser.add_subparsers(dest="command", required=True)
    _add_run_options(commands.add_parser("run", help="run one scenario"))

    converge = commands.add_parser("converge", help="refinement study over a K ladder")
    _add_run_options(converge)
    converge.add_argument(
        "--elements-list",
        type=int,
        nargs="+",
        default=[64, 128, 256],
        metavar="K",
        help="strictly increasing powers of two; replaces --elements",
    )

    verify = commands.add_parser("verify", help="randomized property suite")
    verify.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """File values first, flags on top."""
    if os.path.exists(args.config):
        cfg = load_config(args.config)
    elif args.config != DEFAULT_CONFIG_PATH:
        raise ConfigurationError(f"Config file not found: {args.config}")
    else:
        cfg = RunConfig()

    update = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if getattr(args, "scenario", None):
        update["scenario"] = args.scenario
    if getattr(args, "dump_tensors", None):
        update["dump_tensors"] = args.dump_tensors
    if getattr(args, "track", False):
        update["tracking"] = cfg.tracking.model_copy(update={"enabled": True})
    cfg = cfg.model_copy(update=update)

    if args.command == "verify":
        return cfg
    if args.command == "converge" and args.elements is not None:
        raise ConfigurationError("converge takes its element counts from --elements-list")
    return cfg.with_overrides(
        N=args.moments,
        P=args.degree,
        K=args.elements,
        cfl=args.cfl,
        dt=args.dt,
        t_end=args.t_end,
        flux_mode=args.flux,
        friction=args.friction,
        nu=args.nu,
        shock_capture=args.shock_capture,
        output_dir=args.output,
        snapshot_count=args.snapshots,
        model=args.model,
        well_balanced=args.well_balanced,
    )


def _print_run_summary(result) -> None:
    metrics = result.summary()
    print(f"\n============= {result.scenario.name} Summary ==============")
    print(f"t = {metrics['t']:.6g} after {metrics['steps']} steps, output in {result.output_dir}")
    print(
        f"Total entropy: {metrics['total_entropy']:.12e}, "
        f"total mass: {metrics['total_mass']:.12e}"
    )
    if result.scenario.H0 is not None:
        print(f"Lake at rest error: {metrics['lake_at_rest_error']:.6e}")
    if result.errors is not None:
        for name, value in zip(component_names(result.scenario.N), result.errors):
            print(f"L2 error {name}: {value:.6e}")
    print("=====================================================\n")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    if args.quiet:
        logging.getLogger().setLevel(logging.WARNING)
    elif args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    progress = not args.quiet

    try:
        cfg = resolve_config(args)
        if args.command == "run":
            result = run_scenario(cfg, progress=progress)
            _print_run_summary(result)
        elif args.command == "converge":
            table = run_convergence(cfg, args.elements_list, progress=progress)
            print("\n============= Convergence Table ==============")
            print(table.to_string(index=False, float_format=lambda v: f"{v:.3e}"))
            print("=====================================================\n")
        else:
            report = run_property_suite(seed=cfg.seed, samples=args.samples)
            for check in report.results:
                status = "PASS" if check.passed else "FAIL"
                print(f"  {status} {check.name}: {check.detail}")
            print(f"{report.passed} passed, {len(report.failed)} failed")
            if not report.ok:
                return EXIT_PROPERTY
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except SolverError as e:
        logger.error(f"Solver failure: {e}")
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
