from pathlib import Path

from faultcontact.core.errors import ConfigError
from faultcontact.core.utils import csv_text
from faultcontact.models.bench_models import SweepRecord
from faultcontact.services.bench_service import CASES, SWEEP_FACTORS, penalty_sweep
from faultcontact.services.output_service import write_records


def _factors(text: str):
    try:
        return [float(f) for f in text.split(",") if f.strip()]
    except ValueError:
        raise ConfigError(f"penalty factors must be comma-separated numbers, got {text!r}", "factors")


def register(subparsers):
    parser = subparsers.add_parser("sweep", help="iteration counts as the penalty parameter varies")
    parser.add_argument("case", choices=CASES)
    parser.add_argument("--factors", default=",".join(f"{f:g}" for f in SWEEP_FACTORS))
    parser.add_argument("--kind", default="hex8")
    parser.add_argument("--level", type=int, default=0)
    parser.set_defaults(handler=sweep)


def sweep(args) -> int:
    records = penalty_sweep(args.case, _factors(args.factors), kind=args.kind, level=args.level, config=args.solver_config)
    write_records(Path(args.output_dir) / f"sweep_{args.case}.csv", records, SweepRecord.COLUMNS)
    print(csv_text(SweepRecord.COLUMNS, [r.row() for r in records]), end="")
    return 0
