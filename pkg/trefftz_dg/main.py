import argparse
import logging
import sys

from dotenv import load_dotenv

from trefftz_dg.config.settings import PLANEWAVE_OMEGA, load_config
from trefftz_dg.storage.csv_storage import CsvStorage
from trefftz_dg.storage.models import DofTableRecord, PlaneWaveRecord, SingularValueRecord
from trefftz_dg.study.planewave import run_planewave_1d
from trefftz_dg.study.runner import mesh_hierarchy, run_study
from trefftz_dg.study.tables import run_dof_table, run_sv_diagnostics
from trefftz_dg.utils.errors import ConfigError, DecompositionError, SolverError
from trefftz_dg.utils.logger import get_logger, set_console_level

logger = get_logger(__name__)
load_dotenv()

EXIT_OK = 0
EXIT_SOLVER_FAILURE = 1
EXIT_CONFIG_ERROR = 2

OVERRIDE_FLAGS = ("problem", "pmin", "pmax", "refinements", "base_n", "eps", "kernel_method",
                  "omega", "threads", "timings", "solver_strategy", "out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Embedded Trefftz DG convergence studies")
    parser.add_argument(
        "command",
        choices=["run-study", "planewave-1d", "dof-table", "sv-diagnostics"],
        help="The command to execute."
    )
    parser.add_argument("--config", help="key=value study file; command-line flags take precedence.")
    parser.add_argument("--problem", help="laplace, poisson, helmholtz or advection.")
    parser.add_argument("--pmin", type=int, help="Lowest polynomial degree.")
    parser.add_argument("--pmax", type=int, help="Highest polynomial degree.")
    parser.add_argument("--refinements", type=int, help="Number of mesh levels of the study.")
    parser.add_argument("--base-n", dest="base_n", type=int, help="Subdivisions of the coarsest unit square mesh.")
    parser.add_argument("--eps", type=float, help="Singular value truncation parameter.")
    parser.add_argument("--kernel-method", dest="kernel_method", choices=["svd", "qr"], help="Kernel extraction method.")
    parser.add_argument("--omega", type=float, help="Wave number (Helmholtz and planewave-1d).")
    parser.add_argument("--threads", type=int, help="Worker threads for element loops.")
    parser.add_argument("--solver-strategy", dest="solver_strategy", choices=["direct", "iterative"],
                        help="Sparse LU or Krylov solves above the dense threshold.")
    parser.add_argument("--timings", action="store_const", const=True, help="Fill the timing columns.")
    parser.add_argument("--elements", type=int, default=54, help="Element count of the dof-table mesh.")
    parser.add_argument("--out", help="Output CSV path.")
    parser.add_argument("--quiet", action="store_true", help="Only warnings and errors on the console.")
    return parser


def _overrides(args) -> dict:
    return {name: getattr(args, name) for name in OVERRIDE_FLAGS}


def run_command(args) -> int:
    overrides = _overrides(args)
    config = load_config(args.config, overrides)
    logger.info(f"Executing command: {args.command} -> {config.out}")

    if args.command == "run-study":
        run_study(config)
    elif args.command == "planewave-1d":
        storage = CsvStorage(config.out, PlaneWaveRecord.COLUMNS)
        omega = config.omega if config.omega is not None else PLANEWAVE_OMEGA
        run_planewave_1d(config.degrees, omega=omega, eps=config.eps, method=config.kernel_method,
                         equilibrate=config.equilibrate, storage=storage)
    elif args.command == "dof-table":
        storage = CsvStorage(config.out, DofTableRecord.COLUMNS)
        run_dof_table(args.elements, config.degrees, storage=storage)
    elif args.command == "sv-diagnostics":
        mesh = mesh_hierarchy(config.base_n, config.refinements)[-1]
        storage = CsvStorage(config.out, SingularValueRecord.COLUMNS)
        run_sv_diagnostics(mesh, config.degrees, eps=config.eps, method=config.kernel_method,
                           scaled=config.scaled_eps, equilibrate=config.equilibrate,
                           threads=config.threads, storage=storage)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.quiet:
        set_console_level(logging.WARNING)

    try:
        return run_command(args)
    except ConfigError as e:
        logger.critical(f"Configuration error ({e.key}): {e}")
        return EXIT_CONFIG_ERROR
    except (SolverError, DecompositionError) as e:
        residual = getattr(e, "residual", None)
        logger.error(f"Solver failure: {e} (residual={residual})")
        return EXIT_SOLVER_FAILURE
    except ValueError as e:
        logger.critical(f"Invalid input: {e}")
        return EXIT_CONFIG_ERROR
    except Exception as e:
        logger.critical(f"An unexpected error occurred while running {args.command}: {e}", exc_info=True)
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
