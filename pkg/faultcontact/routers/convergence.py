from pathlib import Path

from faultcontact.core.utils import csv_text, write_csv
from faultcontact.models.bench_models import ErrorReport
from faultcontact.services.bench_service import STUDY_CASES, convergence_study


def register(subparsers):
    parser = subparsers.add_parser("convergence", help="profile-error convergence study over refinement levels")
    parser.add_argument("case", choices=STUDY_CASES)
    parser.add_argument("--levels", type=int, default=3)
    parser.add_argument("--kinds", default="hex8", help="comma-separated element kinds, e.g. hex,tet,wedge")
    parser.set_defaults(handler=convergence)


def convergence(args) -> int:
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    reports = convergence_study(args.case, args.levels, kinds, args.solver_config)
    rows = [row for report in reports for row in report.rows()]
    write_csv(Path(args.output_dir) / f"convergence_{args.case}.csv", ErrorReport.COLUMNS, rows)
    print(csv_text(ErrorReport.COLUMNS, rows), end="")
    return 0
