import logging
from pathlib import Path

from faultcontact.core.utils import atomic_write_text
from faultcontact.services.config_service import build_problem, echo_config, load_config
from faultcontact.services.output_service import fault_profile, write_fields, write_profile_csv, write_report_csv
from faultcontact.services.solver_service import solve_schedule

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("run", help="solve the problem described by a TOML/JSON configuration")
    parser.add_argument("config", type=Path, help="configuration file")
    parser.set_defaults(handler=run)


def run(args) -> int:
    config = load_config(args.config)
    out = Path(args.output_dir)
    if config.output.echo:
        atomic_write_text(out / config.output.echo, echo_config(config))
    problem = build_problem(config, base_dir=args.config.parent)
    result = solve_schedule(problem, config.solver)

    if config.output.profile:
        for snap in result.snapshots:
            write_profile_csv(out / config.output.profile.format(step=snap.step), fault_profile(problem.mesh, snap.state))
    if config.output.report:
        write_report_csv(out / config.output.report, result.report)
    if config.output.fields:
        write_fields(out / config.output.fields, problem.mesh, result.u, result.state)
    print(result.report.summary())
    return 0
