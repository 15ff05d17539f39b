import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError
from threadpoolctl import threadpool_limits

from faultcontact.core.errors import ConfigError, FaultContactError
from faultcontact.models.problem_models import KrylovConfig, SolverConfig
from faultcontact.routers import bench, convergence, infsup, run, sweep

logger = logging.getLogger("faultcontact")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultcontact",
        description="Quasi-static frictional fault contact with a stabilized augmented Lagrangian method.",
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--output-dir", default=".", help="directory for every file a command writes")
    parser.add_argument("--variant", default="uzawa", choices=["uzawa", "interleaved"], help="multiplier loop (bench, convergence, sweep)")
    parser.add_argument("--symmetric", action="store_true", help="drop the nonsymmetric friction tangent terms")
    parser.add_argument("--linear-solver", default="auto", choices=["auto", "direct", "gmres", "cg"])
    parser.add_argument("--threads", type=positive_int, default=None, help="cap on BLAS/LAPACK threads (default: library choice)")
    parser.add_argument("--seed", type=int, default=0, help="seed of every random start vector")

    # Register commands
    subparsers = parser.add_subparsers(dest="command", required=True)
    for router in (run, bench, convergence, infsup, sweep):
        router.register(subparsers)
    return parser


def solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(
            variant=args.variant,
            symmetric=args.symmetric,
            krylov=KrylovConfig(method=args.linear_solver),
        )
    except ValidationError as exc:
        raise ConfigError(exc.errors()[0]["msg"], "solver")


def configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    # Global exception handler
    try:
        args.solver_config = solver_config(args)
        with threadpool_limits(limits=args.threads):
            return args.handler(args)
    except FaultContactError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except Exception:
        logger.exception("unexpected error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
