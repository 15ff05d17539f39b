from unittest.mock import patch

import pytest

from faultcontact.core.errors import ConfigError, NonConvergenceError
from faultcontact.index import main
from faultcontact.models.bench_models import BenchRecord, ErrorReport
from faultcontact.models.report_models import InfSupRecord, SolveReport
from faultcontact.services.bench_service import BenchmarkResult
from faultcontact.services.config_service import build_problem, echo_config, load_config, parse_config

TINY = """\
name = "tiny"

[mesh.grid]
extents = [2.0, 2.0, 2.0]
divisions = [2, 2, 2]

[[fault.planes]]
axis = "z"
coordinate = 1.0

[material.0]
E = 1.0
nu = 0.25

[friction]
friction_angle_deg = 30.0

[steps.0]
label = 1.0
dirichlet = [{ set = "zmin", x = 0.0, y = 0.0, z = 0.0 }]
neumann = [{ set = "zmax", traction = [0.0, 0.0, -0.1] }]
"""


def bench_result(kkt_passed=True):
    record = BenchRecord(
        case="constant-slip", kind="hex8", level=0, h=1.0, err_slip=1e-4,
        kkt_passed=kkt_passed, uzawa=2, newton=4, krylov=4, slip=10,
    )
    return BenchmarkResult(record=record, report=SolveReport(variant="uzawa", symmetric=False))


def test_parse_config_defaults():
    config = parse_config(TINY)
    assert config.name == "tiny"
    assert config.solver.variant == "uzawa"
    assert config.fault.enriched
    assert config.output.profile == "profile_step{step}.csv"
    assert list(config.material) == [0]


def test_unknown_key_reports_its_path():
    with pytest.raises(ConfigError) as exc:
        parse_config(TINY + "\n[solver]\nbogus = 1\n")
    assert exc.value.path == "solver.bogus"
    assert "unknown key" in str(exc.value)


def test_malformed_configuration():
    with pytest.raises(ConfigError):
        parse_config("[mesh\n")
    with pytest.raises(ConfigError):
        parse_config('{"mesh": ')


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    path = tmp_path / "accent.toml"
    path.write_bytes('name = "café"\n'.encode("utf-8"))
    with pytest.raises(ConfigError):
        load_config(path)


def test_echo_parses_back_to_the_same_configuration():
    config = parse_config(TINY)
    echoed = echo_config(config)
    assert echoed.lstrip().startswith("{")
    assert parse_config(echoed) == config


def test_undefined_set_is_a_config_error():
    config = parse_config(TINY.replace('set = "zmin"', 'set = "nowhere"'))
    with pytest.raises(ConfigError) as exc:
        build_problem(config)
    assert exc.value.path == "steps"


def test_run_command_writes_every_output(tmp_path, capsys):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text(TINY)
    out = tmp_path / "out"

    assert main(["--output-dir", str(out), "run", str(cfg)]) == 0

    names = sorted(p.name for p in out.iterdir())
    assert names == ["effective_config.json", "fields.vtk", "fields_fault.vtk", "profile_step0.csv", "report.csv"]
    assert "converged=True" in capsys.readouterr().out


def test_run_command_rejects_bad_configuration(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(TINY.replace("nu = 0.25", "nu = 0.7"))
    assert main(["--output-dir", str(tmp_path), "run", str(cfg)]) == 2


@patch("faultcontact.routers.bench.run_benchmark")
def test_bench_command(mock_run, tmp_path, capsys):
    mock_run.return_value = bench_result()

    assert main(["--output-dir", str(tmp_path), "bench", "constant-slip"]) == 0

    assert (tmp_path / "bench_constant-slip_hex8_L0.csv").exists()
    assert (tmp_path / "bench_constant-slip_hex8_L0_report.csv").exists()
    assert capsys.readouterr().out.startswith(",".join(BenchRecord.COLUMNS))
    case, kind, level, config = mock_run.call_args.args
    assert (case, kind, level) == ("constant-slip", "hex8", 0)
    assert config.variant == "uzawa" and not config.symmetric


@patch("faultcontact.routers.bench.run_benchmark")
def test_bench_command_exit_codes(mock_run, tmp_path):
    mock_run.return_value = bench_result(kkt_passed=False)
    assert main(["--output-dir", str(tmp_path), "bench", "constant-slip"]) == 1

    mock_run.side_effect = NonConvergenceError("stalled", 1.0, 0)
    assert main(["--output-dir", str(tmp_path), "bench", "constant-slip"]) == 3

    mock_run.side_effect = RuntimeError("boom")
    assert main(["--output-dir", str(tmp_path), "bench", "constant-slip"]) == 1


@patch("faultcontact.routers.bench.run_benchmark")
def test_global_solver_options(mock_run, tmp_path):
    mock_run.return_value = bench_result()
    argv = ["--output-dir", str(tmp_path), "--variant", "interleaved", "--symmetric", "--linear-solver", "cg"]
    assert main(argv + ["bench", "constant-slip", "--kind", "tet", "--level", "1"]) == 0
    _, kind, level, config = mock_run.call_args.args
    assert (kind, level) == ("tet", 1)
    assert config.variant == "interleaved" and config.symmetric
    assert config.krylov.method == "cg"


def test_cg_without_symmetry_is_rejected(tmp_path):
    assert main(["--output-dir", str(tmp_path), "--linear-solver", "cg", "infsup"]) == 2


@patch("faultcontact.routers.convergence.convergence_study")
def test_convergence_command(mock_study, tmp_path):
    mock_study.return_value = [
        ErrorReport(
            case="inclined-fault", kind="hex8", h=[0.5, 0.25, 0.125],
            err_traction=[0.4, 0.2, 0.1], err_slip=[0.16, 0.04, 0.01], rate_traction=1.0, rate_slip=2.0,
        )
    ]
    assert main(["--output-dir", str(tmp_path), "convergence", "inclined-fault", "--kinds", "hex8, tet"]) == 0
    assert mock_study.call_args.args[2] == ["hex8", "tet"]
    lines = (tmp_path / "convergence_inclined-fault.csv").read_text().splitlines()
    assert len(lines) == 4


@patch("faultcontact.routers.infsup.infsup_study")
def test_infsup_command(mock_study, tmp_path):
    mock_study.return_value = [InfSupRecord(level=0, kind="hex8", h=0.5, beta_enriched=0.45, beta_plain=0.3)]
    assert main(["--output-dir", str(tmp_path), "infsup", "--levels", "1"]) == 0
    mock_study.assert_called_once_with(1, "hex8", seed=0)
    assert (tmp_path / "infsup.csv").read_text().startswith(",".join(InfSupRecord.COLUMNS))


@patch("faultcontact.index.threadpool_limits")
@patch("faultcontact.routers.infsup.infsup_study")
def test_threads_and_seed_reach_the_command(mock_study, mock_limits, tmp_path):
    mock_study.return_value = [InfSupRecord(level=0, kind="tet4", h=0.5, beta_enriched=0.4, beta_plain=0.2)]
    argv = ["--output-dir", str(tmp_path), "--threads", "2", "--seed", "11", "infsup", "--levels", "1", "--kind", "tet4"]
    assert main(argv) == 0
    mock_limits.assert_called_once_with(limits=2)
    mock_study.assert_called_once_with(1, "tet4", seed=11)


def test_threads_must_be_positive():
    with pytest.raises(SystemExit) as exc:
        main(["--threads", "0", "infsup"])
    assert exc.value.code == 2


def test_sweep_rejects_bad_factors(tmp_path):
    assert main(["--output-dir", str(tmp_path), "sweep", "constant-slip", "--factors", "1,x"]) == 2


def test_unknown_case_is_an_argument_error():
    with pytest.raises(SystemExit) as exc:
        main(["bench", "dam-break"])
    assert exc.value.code == 2


def test_repeated_bench_runs_write_identical_tables(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        assert main(["--output-dir", str(out), "--threads", "1", "bench", "constant-slip"]) == 0

    names = sorted(p.name for p in first.glob("*.csv"))
    assert names == sorted(p.name for p in second.glob("*.csv"))
    assert len(names) == 3
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()
