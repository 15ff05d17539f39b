from pathlib import Path

from faultcontact.core.utils import csv_text
from faultcontact.models.report_models import InfSupRecord
from faultcontact.services.infsup_service import infsup_study
from faultcontact.services.output_service import write_records


def register(subparsers):
    parser = subparsers.add_parser("infsup", help="inf-sup constants with and without bubbles under refinement")
    parser.add_argument("--levels", type=int, default=3)
    parser.add_argument("--kind", default="hex8")
    parser.set_defaults(handler=infsup)


def infsup(args) -> int:
    records = infsup_study(args.levels, args.kind, seed=args.seed)
    write_records(Path(args.output_dir) / "infsup.csv", records, InfSupRecord.COLUMNS)
    print(csv_text(InfSupRecord.COLUMNS, [r.row() for r in records]), end="")
    return 0
