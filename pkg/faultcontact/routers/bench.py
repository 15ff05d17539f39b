import logging
from pathlib import Path

from faultcontact.core.utils import csv_text
from faultcontact.models.bench_models import BenchRecord
from faultcontact.services.bench_service import CASES, run_benchmark
from faultcontact.services.output_service import write_profile_csv, write_records, write_report_csv

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("bench", help="run one benchmark case and compare with its reference")
    parser.add_argument("case", choices=CASES)
    parser.add_argument("--kind", default="hex8", help="hex8, tet4 or wedge6 (hex, tet, wedge also accepted)")
    parser.add_argument("--level", type=int, default=0, help="refinement level")
    parser.set_defaults(handler=bench)


def bench(args) -> int:
    result = run_benchmark(args.case, args.kind, args.level, args.solver_config)
    record = result.record
    stem = f"bench_{args.case}_{record.kind}_L{args.level}"
    out = Path(args.output_dir)
    write_records(out / f"{stem}.csv", [record], BenchRecord.COLUMNS)
    write_profile_csv(out / f"{stem}_profile.csv", result.profiles)
    write_report_csv(out / f"{stem}_report.csv", result.report)
    print(csv_text(BenchRecord.COLUMNS, [record.row()]), end="")
    return 0 if record.kkt_passed else 1
