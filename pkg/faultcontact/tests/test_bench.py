import math
from types import SimpleNamespace
from unittest.mock import MagicMock, patch

import numpy as np
import pytest
from pydantic import ValidationError

from faultcontact.core.errors import AnalyticDomainError, MeshError, NonConvergenceError
from faultcontact.core.system_models import ContactState
from faultcontact.models.bench_models import BenchRecord, ErrorReport, InclinedFaultParams, VerticalFaultParams
from faultcontact.models.problem_models import SolverConfig
from faultcontact.models.report_models import SolveReport, StepReport
from faultcontact.services.bench_service import (
    BenchmarkResult,
    _vertical_errors,
    case_mesh_size,
    constant_slip_case,
    convergence_study,
    fault_l2_error,
    fit_rate,
    inclined_fault_analytic,
    inclined_fault_case,
    penalty_sweep,
    run_benchmark,
    sso_load_history,
    stick_slip_open_case,
    t_crack_case,
    vertical_fault_analytic,
    vertical_fault_case,
)
from faultcontact.services.solver_service import solve_schedule


def fake_result(case, kind, level, config):
    h = 0.5 / 2**level
    record = BenchRecord(
        case=case, kind=kind, level=level, h=h, err_traction=0.1 * h, err_slip=h**2,
        kkt_passed=True, uzawa=1, newton=1, krylov=1,
    )
    return BenchmarkResult(record=record, report=SolveReport(variant="uzawa", symmetric=False))


def test_inclined_fault_reference_values():
    params = InclinedFaultParams()
    assert math.isclose(params.normal_traction, -0.116978, rel_tol=1e-5)
    assert math.isclose(params.slip_amplitude, 8.5296e-6, rel_tol=1e-4)

    t_N, slip = inclined_fault_analytic(params, [0.0, 1.0, 2.0])
    assert np.allclose(t_N, params.normal_traction)
    assert np.allclose(slip, [0.0, params.slip_amplitude, 0.0])
    with pytest.raises(AnalyticDomainError):
        inclined_fault_analytic(params, [2.5])


def test_vertical_fault_reference_values():
    params = VerticalFaultParams()
    assert math.isclose(params.C, -2.94905, rel_tol=1e-5)
    assert math.isclose(params.A, 1217.067, rel_tol=1e-5)
    assert math.isclose(vertical_fault_analytic(params, 0.0, "traction"), 4.0883, rel_tol=1e-4)

    slip = vertical_fault_analytic(params, np.array([-200.0, -100.0, 0.0, 100.0, 200.0]), "slip")
    assert np.allclose(slip[[0, 4]], 0.0)
    plateau = (1.0 - 2.0 * params.nu) * params.biot_alpha * abs(params.pressure) * (params.b - params.a) / params.shear_modulus
    assert math.isclose(plateau, 0.18173, rel_tol=1e-4)
    assert np.allclose(slip[2], plateau, rtol=1e-9)
    assert np.allclose(slip[1], slip[3])
    assert slip[1] < slip[2]

    with pytest.raises(AnalyticDomainError):
        vertical_fault_analytic(params, [75.0], "traction")
    with pytest.raises(ValueError):
        vertical_fault_analytic(params, [0.0], "stress")
    with pytest.raises(ValidationError):
        VerticalFaultParams(a=200.0)


def test_sso_load_history():
    assert sso_load_history(2.0) == (-6.0, -2.0)
    assert sso_load_history(5.0) == (-15.0, -5.0)
    assert sso_load_history(10.0) == (15.0, 5.0)


def test_fault_l2_error():
    ana = np.array([1.0, 2.0, 3.0, 4.0])
    w = np.ones(4)
    assert fault_l2_error(ana, ana, w) == 0.0
    assert math.isclose(fault_l2_error(1.1 * ana, ana, w), 0.1)

    num = ana.copy()
    num[0] = 100.0
    coord = np.array([0.02, 0.4, 0.6, 0.9])
    assert fault_l2_error(num, ana, w, coord, (0.0, 1.0), trim_fraction=0.9) == 0.0

    with pytest.raises(AnalyticDomainError):
        fault_l2_error(ana, np.zeros(4), w)
    with pytest.raises(ValueError):
        fault_l2_error([], [], [])
    with pytest.raises(ValueError):
        fault_l2_error(ana, ana, w, trim_fraction=0.5)


def test_fit_rate():
    h = [1.0, 0.5, 0.25]
    assert math.isclose(fit_rate(h, [x**2 for x in h]), 2.0)
    assert fit_rate(h, [0.0, 0.0, 0.0]) is None
    assert fit_rate(h, [0.1, 0.0, 0.0]) is None


def test_error_report_rows_mark_exact_fits():
    report = ErrorReport(case="inclined-fault", kind="hex8", h=[0.5, 0.25], err_traction=[0.0, 0.0], err_slip=[0.1, 0.05], rate_slip=1.0)
    rows = report.rows()
    assert rows[0] == ["inclined-fault", "hex8", 0.5, 0.0, 0.1, "exact", 1.0]
    assert not report.exact


def test_case_builders():
    inclined = inclined_fault_case(mesh_size=0.5)
    assert inclined.mesh.n_faces == 4
    assert math.isclose(inclined.mesh.faults.area.sum(), 1.0)
    assert {"pin_a", "pin_b"} <= set(inclined.mesh.node_sets)

    vertical = vertical_fault_case(mesh_size=75.0)
    assert set(np.unique(vertical.mesh.cell_region).tolist()) == {0, 1, 2}
    assert np.allclose(vertical.mesh.faults.normal, [1.0, 0.0, 0.0])
    assert vertical.steps[0].reservoir_pressure == {1: -25.0, 2: -25.0}

    sso = stick_slip_open_case()
    assert sso.mesh.n_faces == 100
    assert len(sso.mesh.face_sets["zmax_right"]) == 20
    assert [s.label for s in sso.steps] == [float(t) for t in range(11)]
    peak = {n.set: n.traction for n in sso.steps[5].neumann}
    assert peak["zmax_right"] == [0.0, 0.0, -15.0]
    assert peak["xmax"] == [-10.0, 0.0, 0.0]

    assert constant_slip_case(divisions=(4, 1, 4)).mesh.n_faces == 4

    crack = t_crack_case(scale_factor=50)
    assert sorted(crack.mesh.faults.tag.tolist()) == [0, 0, 0, 0, 1, 1]
    assert crack.steps[-1].fault_pressure == {1: 3.0}


def test_case_builders_reject_bad_arguments():
    with pytest.raises(MeshError):
        vertical_fault_case(mesh_size=40.0)
    with pytest.raises(ValueError):
        vertical_fault_case(scenario="creep")
    with pytest.raises(ValueError):
        t_crack_case(scale_factor=3)


def test_case_mesh_size():
    assert case_mesh_size("inclined-fault", 0) == 0.25
    assert case_mesh_size("inclined-fault", 2) == 0.0625
    assert case_mesh_size("vertical-fault", 1) == 37.5
    assert case_mesh_size("t-crack", 0) == 50.0
    with pytest.raises(ValueError):
        case_mesh_size("dam-break", 0)
    with pytest.raises(ValueError):
        case_mesh_size("inclined-fault", -1)


def test_run_benchmark_constant_slip():
    result = run_benchmark("constant-slip", level=0)
    record = result.record
    assert record.err_traction is None
    assert record.err_slip < 5e-3
    assert record.kkt_passed
    assert record.slip == 10
    assert len(result.profiles) == 10
    assert all(p.state == "slip" for p in result.profiles)


def test_convergence_study_fits_rates():
    reports = convergence_study("inclined-fault", levels=3, kinds=("hex8", "tet4"), runner=fake_result)
    assert [r.kind for r in reports] == ["hex8", "tet4"]
    assert reports[0].h == [0.5, 0.25, 0.125]
    assert math.isclose(reports[0].rate_traction, 1.0)
    assert math.isclose(reports[0].rate_slip, 2.0)


def test_convergence_study_rejects_bad_requests():
    with pytest.raises(ValueError):
        convergence_study("constant-slip", runner=fake_result)
    with pytest.raises(ValueError):
        convergence_study("inclined-fault", levels=2, runner=fake_result)


def test_convergence_study_names_the_failing_level():
    runner = MagicMock(side_effect=[fake_result("vertical-fault", "hex8", 0, None), NonConvergenceError("stalled", 1.0, 0)])
    with pytest.raises(NonConvergenceError) as exc:
        convergence_study("vertical-fault", runner=runner)
    assert "vertical-fault/hex8 level 1" in str(exc.value)


@patch("faultcontact.services.bench_service.solve_schedule")
def test_penalty_sweep(mock_solve):
    step = StepReport(step=0, label=1.0, uzawa=3, newton=5, krylov=5, converged=True)
    mock_solve.side_effect = [
        MagicMock(report=SolveReport(variant="uzawa", symmetric=False, steps=[step])),
        NonConvergenceError("stalled", 1.0, 0),
    ]

    records = penalty_sweep("constant-slip", factors=(0.5, 2.0), variants=(("uzawa", False),))

    assert [r.factor for r in records] == [0.5, 2.0]
    assert records[0].converged and records[0].uzawa == 3 and records[0].newton == 5
    assert not records[1].converged
    scales = [c.args[0].penalty.scale for c in mock_solve.call_args_list]
    assert scales == [5.0, 20.0]


def test_penalty_sweep_rejects_non_positive_factors():
    with pytest.raises(ValueError):
        penalty_sweep("constant-slip", factors=(0.0,), variants=(("uzawa", False),))


def test_vertical_errors_compare_inside_the_refined_band_away_from_the_corners():
    params = VerticalFaultParams()
    h = 37.5
    y = np.array([-400.0, -262.5, 0.0, 112.5, 262.5, 400.0])
    compared = np.array([False, True, True, False, True, False])
    t_T = np.zeros((y.size, 2))
    t_T[compared, 0] = vertical_fault_analytic(params, y[compared], "traction")
    t_T[~compared, 0] = 1e3
    slip = vertical_fault_analytic(params, y, "slip")
    mesh = MagicMock()
    mesh.face_centroids.return_value = np.column_stack([np.zeros_like(y), np.zeros_like(y), y])
    mesh.faults.area = np.full(y.size, h * h)
    stuck = SimpleNamespace(system=SimpleNamespace(mesh=mesh), state=SimpleNamespace(t_T=t_T))
    last = SimpleNamespace(g_T_prev=np.zeros((y.size, 2)), dg_T=np.column_stack([np.zeros_like(y), slip]))
    sliding = SimpleNamespace(snapshots=[SimpleNamespace(state=last)])

    err_t, err_s, coords = _vertical_errors(stuck, sliding, params, h)

    assert err_t == pytest.approx(0.0, abs=1e-12)
    assert err_s == pytest.approx(0.0, abs=1e-12)
    assert np.array_equal(coords, y)


@pytest.fixture(scope="module")
def sso_runs():
    problem = stick_slip_open_case()
    return {variant: solve_schedule(problem, SolverConfig(variant=variant)) for variant in ("uzawa", "interleaved")}


@pytest.mark.parametrize("variant", ["uzawa", "interleaved"])
def test_stick_slip_open_passes_through_every_state(sso_runs, variant):
    result = sso_runs[variant]
    counts = [s.state.counts() for s in result.snapshots]

    assert result.report.converged
    assert all(s.kkt is not None and s.kkt.all_passed for s in result.snapshots)
    assert counts[0]["stick"] == result.system.n_faces
    assert any(c["slip"] > 0 for c in counts)
    assert counts[-1]["open"] > 0


def test_interleaved_needs_fewer_newton_steps_on_stick_slip_open(sso_runs):
    assert sso_runs["interleaved"].report.total_newton < sso_runs["uzawa"].report.total_newton


@pytest.mark.parametrize("variant", ["uzawa", "interleaved"])
def test_t_crack_pressurization_converges(variant):
    result = solve_schedule(t_crack_case(scale_factor=50), SolverConfig(variant=variant))

    assert result.report.converged
    assert all(s.kkt.all_passed for s in result.snapshots)
    opened = result.state.state[result.system.mesh.faults.tag == 1]
    assert np.any(opened == ContactState.OPEN)
