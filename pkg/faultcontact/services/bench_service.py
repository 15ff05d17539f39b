"""Benchmark problems, their closed-form references, and profile-error studies."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from faultcontact.core.elements import ElementKind
from faultcontact.core.errors import AnalyticDomainError, LinearSolverError, MeshError, NonConvergenceError
from faultcontact.core.mesh_models import Mesh
from faultcontact.models.bench_models import (
    BenchRecord,
    ErrorReport,
    InclinedFaultParams,
    SweepRecord,
    VerticalFaultParams,
)
from faultcontact.models.grid_models import FaultPlane, RegionBox
from faultcontact.models.problem_models import (
    DirichletCondition,
    ElasticMaterial,
    FrictionParams,
    LoadStep,
    NeumannCondition,
    ProblemDefinition,
    SolverConfig,
)
from faultcontact.models.report_models import FaultProfileRecord, SolveReport
from faultcontact.services.mesh_service import build_structured_hex_grid, graded_grid_lines
from faultcontact.services.output_service import fault_profile
from faultcontact.services.solver_service import ScheduleResult, solve_schedule

logger = logging.getLogger(__name__)

CASES = ("inclined-fault", "vertical-fault", "stick-slip-open", "constant-slip", "t-crack")
STUDY_CASES = ("inclined-fault", "vertical-fault")
SWEEP_FACTORS = (0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0, 200.0)
SWEEP_VARIANTS = (("uzawa", False), ("uzawa", True), ("interleaved", False), ("interleaved", True))

SSO_INITIAL_STRESS = -5.0
CONSTANT_SLIP_TOP = (0.1, 0.1, -1e-4)
TCRACK_SCALES = (1, 2, 5, 10, 25, 50)
TCRACK_PRESSURE = 3.0
TCRACK_REMOTE_STRESS = -2.0


def _require_multiple(length: float, h: float, what: str) -> int:
    n = length / h
    if round(n) < 1 or abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise MeshError(f"mesh size {h:g} must divide the {what} ({length:g})")
    return int(round(n))


def _node_line(mesh: Mesh, x: float, z: float) -> np.ndarray:
    tol = 1e-9 * mesh.diameter
    nodes = mesh.nodes
    return np.flatnonzero((np.abs(nodes[:, 0] - x) <= tol) & (np.abs(nodes[:, 2] - z) <= tol))


def _rollers(*sets: str, **components) -> List[DirichletCondition]:
    return [DirichletCondition(set=s, **components) for s in sets]


# ---------------------------------------------------------------------------
# Inclined fault under far-field compression
# ---------------------------------------------------------------------------


def far_field_stress(params: InclinedFaultParams) -> np.ndarray:
    d = np.array([math.cos(params.angle), 0.0, math.sin(params.angle)])
    return -params.sigma * np.outer(d, d)


def inclined_fault_case(
    params: InclinedFaultParams = InclinedFaultParams(), mesh_size: float = 0.25, kind="hex8"
) -> ProblemDefinition:
    """One-element-thick slab with a bounded fault on z = 0, loaded by compression along the inclined direction.

    The compression direction makes the angle ``params.angle`` with the fault
    plane; out-of-plane displacement is fixed on both thickness faces and two
    corner pins remove the in-plane rigid motions.
    """
    b = params.half_length
    _require_multiple(b, mesh_size, "fault half-length")
    lines = graded_grid_lines(2.0 * b, mesh_size, params.domain_factor * b, params.growth).tolist()
    mesh = build_structured_hex_grid(
        grid_lines=[lines, [0.0, mesh_size], lines],
        fault_planes=[FaultPlane(axis="z", coordinate=0.0, bounds=[[-b, b], None])],
        kind=kind,
    )
    lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
    mesh = mesh.with_sets(node_sets={"pin_a": _node_line(mesh, lo[0], lo[2]), "pin_b": _node_line(mesh, hi[0], lo[2])})

    sigma = far_field_stress(params)
    neumann = [
        NeumannCondition(set="xmin", traction=(-sigma[:, 0]).tolist()),
        NeumannCondition(set="xmax", traction=sigma[:, 0].tolist()),
        NeumannCondition(set="zmin", traction=(-sigma[:, 2]).tolist()),
        NeumannCondition(set="zmax", traction=sigma[:, 2].tolist()),
    ]
    dirichlet = _rollers("ymin", "ymax", y=0.0) + [
        DirichletCondition(set="pin_a", x=0.0, z=0.0),
        DirichletCondition(set="pin_b", z=0.0),
    ]
    return ProblemDefinition(
        name="inclined-fault",
        mesh=mesh,
        materials={0: ElasticMaterial(E=params.E, nu=params.nu)},
        friction=FrictionParams.from_degrees(0.0, params.friction_angle_deg),
        steps=[LoadStep(label=1.0, dirichlet=dirichlet, neumann=neumann)],
    )


def inclined_fault_analytic(params: InclinedFaultParams, xi) -> Tuple[np.ndarray, np.ndarray]:
    """Normal traction and slip magnitude at arclength ``xi`` in [0, 2b] measured from one tip."""
    b = params.half_length
    xi = np.asarray(xi, dtype=float)
    tol = 1e-12 * 2.0 * b
    if np.any((xi < -tol) | (xi > 2.0 * b + tol)):
        raise AnalyticDomainError(f"arclength must lie in [0, {2.0 * b:g}]")
    xi = np.clip(xi, 0.0, 2.0 * b)
    t_N = np.full(xi.shape, params.normal_traction)
    slip = params.slip_amplitude / b * np.sqrt(np.maximum(b**2 - (b - xi) ** 2, 0.0))
    return t_N, slip


# ---------------------------------------------------------------------------
# Vertical fault offsetting a depleting reservoir
# ---------------------------------------------------------------------------


def vertical_fault_case(
    params: VerticalFaultParams = VerticalFaultParams(), mesh_size: float = 37.5, kind="hex8", scenario: str = "slip"
) -> ProblemDefinition:
    """Fault on x = 0 through the whole height; the reservoir spans z in (-a, b) on the left and (-b, a) on the right.

    ``scenario="pre_slip"`` gives the fault a cohesion large enough to stick
    everywhere; ``scenario="slip"`` makes it frictionless.
    """
    if scenario not in ("pre_slip", "slip"):
        raise ValueError(f"unknown vertical-fault scenario '{scenario}'")
    h = mesh_size
    for length, what in ((params.a, "offset a"), (params.b, "offset b"), (params.refined_half_width, "refined band")):
        _require_multiple(length, h, what)
    x_lines = graded_grid_lines(params.refined_half_width, h, 0.5 * params.width, params.growth).tolist()
    z_lines = graded_grid_lines(params.refined_half_width, h, 0.5 * params.height, params.growth).tolist()
    half_w = 0.5 * params.width
    regions = [
        RegionBox(region=1, lower=[-half_w, 0.0, -params.a], upper=[0.0, h, params.b]),
        RegionBox(region=2, lower=[0.0, 0.0, -params.b], upper=[half_w, h, params.a]),
    ]
    mesh = build_structured_hex_grid(
        grid_lines=[x_lines, [0.0, h], z_lines],
        fault_planes=[FaultPlane(axis="x", coordinate=0.0)],
        region_boxes=regions,
        kind=kind,
    )
    s0 = params.initial_stress
    material = ElasticMaterial(E=params.E, nu=params.nu, biot_alpha=params.biot_alpha, initial_stress=[s0, s0, s0, 0.0, 0.0, 0.0])
    if scenario == "pre_slip":
        friction = FrictionParams.from_degrees(1e4 * max(abs(params.pressure), abs(s0)), params.friction_angle_deg)
    else:
        friction = FrictionParams()
    step = LoadStep(
        label=1.0,
        dirichlet=_rollers("xmin", "xmax", x=0.0) + _rollers("ymin", "ymax", y=0.0) + _rollers("zmin", z=0.0),
        neumann=[NeumannCondition(set="zmax", traction=[0.0, 0.0, s0])],
        reservoir_pressure={1: params.pressure, 2: params.pressure},
    )
    return ProblemDefinition(
        name=f"vertical-fault-{scenario}",
        mesh=mesh,
        materials={r: material for r in (0, 1, 2)},
        friction=friction,
        steps=[step],
    )


def vertical_fault_analytic(params: VerticalFaultParams, y, quantity: str = "traction") -> np.ndarray:
    """Tangential traction magnitude (stuck fault) or slip magnitude (frictionless fault) at depth ``y``."""
    y = np.asarray(y, dtype=float)
    a, b = params.a, params.b
    if quantity == "traction":
        tol = 1e-9 * b
        if np.any(np.min(np.abs(np.abs(y)[..., None] - np.array([a, b])), axis=-1) <= tol):
            raise AnalyticDomainError("traction is singular at the reservoir corners y = +-a, +-b")
        ratio = ((y - a) ** 2 * (y + a) ** 2) / ((y - b) ** 2 * (y + b) ** 2)
        return np.abs(0.5 * params.C * np.log(ratio))
    if quantity == "slip":
        piece = np.select([y <= -b, y <= -a, y < a, y < b], [0.0, -(y + b), a - b, y - b], 0.0)
        return np.abs(params.C / params.A * piece)
    raise ValueError(f"unknown quantity '{quantity}'")


# ---------------------------------------------------------------------------
# Cases without closed forms
# ---------------------------------------------------------------------------


def sso_load_history(t: float) -> Tuple[float, float]:
    """(sigma_x, sigma_z) at time t: compression ramps to (-15, -5) at t = 5, then reverses at twice the rate."""
    if t <= 5.0:
        return -3.0 * t, -t
    return -15.0 + 6.0 * (t - 5.0), -5.0 + 2.0 * (t - 5.0)


def stick_slip_open_case(kind="hex8", refinement: int = 1) -> ProblemDefinition:
    """Two blocks split by a vertical crack on x = 4.

    The sigma_x history loads the right block's top (z = 20) and the sigma_z
    history, on top of the initial stress, loads its right face (x = 8).
    """
    mesh = build_structured_hex_grid(
        extents=(8.0, 20.0, 20.0),
        divisions=(4 * refinement, 10 * refinement, 10 * refinement),
        fault_planes=[FaultPlane(axis="x", coordinate=4.0)],
        kind=kind,
    )
    top = mesh.face_sets["zmax"]
    centroids = mesh.cell_centroids()
    mesh = mesh.with_sets(face_sets={"zmax_right": top[centroids[top[:, 0], 0] > 4.0]})
    s0 = SSO_INITIAL_STRESS
    material = ElasticMaterial(E=450.0, nu=0.3, initial_stress=[s0, 0.0, 0.0, 0.0, 0.0, 0.0])
    dirichlet = (
        _rollers("xmin", x=0.0)
        + [DirichletCondition(set="zmin", x=0.0, y=0.0, z=0.0)]
        + _rollers("ymin", "ymax", y=0.0)
    )
    steps = []
    for t in range(11):
        sx, sz = sso_load_history(float(t))
        steps.append(
            LoadStep(
                label=float(t),
                dirichlet=dirichlet,
                neumann=[
                    NeumannCondition(set="zmax_right", traction=[0.0, 0.0, sx]),
                    NeumannCondition(set="xmax", traction=[s0 + sz, 0.0, 0.0]),
                ],
            )
        )
    return ProblemDefinition(
        name="stick-slip-open",
        mesh=mesh,
        materials={0: material},
        friction=FrictionParams.from_degrees(0.0, 30.0),
        steps=steps,
    )


def constant_slip_case(kind="hex8", divisions: Tuple[int, int, int] = (10, 1, 10)) -> ProblemDefinition:
    """Upper block dragged over a horizontal fault by a uniform top displacement; slip is 0.1 * sqrt(2)."""
    mesh = build_structured_hex_grid(
        extents=(10.0, 1.0, 10.0),
        divisions=divisions,
        fault_planes=[FaultPlane(axis="z", coordinate=5.0)],
        kind=kind,
    )
    ux, uy, uz = CONSTANT_SLIP_TOP
    step = LoadStep(
        label=1.0,
        dirichlet=[
            DirichletCondition(set="zmin", x=0.0, y=0.0, z=0.0),
            DirichletCondition(set="zmax", x=ux, y=uy, z=uz),
        ],
    )
    return ProblemDefinition(
        name="constant-slip",
        mesh=mesh,
        materials={0: ElasticMaterial(E=250.0, nu=0.3)},
        friction=FrictionParams.from_degrees(0.0, 5.71),
        steps=[step],
    )


def _tcrack_lines(scale_factor: int) -> np.ndarray:
    # 10 m cells over [-1000, 1000] and 45 m cells outside, both coarsened by the scale factor
    inner = np.linspace(-1000.0, 1000.0, 200 // scale_factor + 1)
    outer = 1000.0 + 45.0 * scale_factor * np.arange(1, 50 // scale_factor + 1)
    return np.concatenate([-outer[::-1], inner, outer])


def t_crack_case(scale_factor: int = 5, kind="hex8", steps: int = 10) -> ProblemDefinition:
    """Pressurized vertical crack (tag 1) standing on the midpoint of a frictional horizontal crack (tag 0).

    ``scale_factor`` 1 gives the full 300 x 300 x 2 grid; the default 5 gives 60 x 60 x 2.
    """
    if scale_factor not in TCRACK_SCALES:
        raise ValueError(f"scale factor must be one of {TCRACK_SCALES}")
    lines = _tcrack_lines(scale_factor).tolist()
    h = 10.0 * scale_factor
    mesh = build_structured_hex_grid(
        grid_lines=[lines, lines, [0.0, h, 2.0 * h]],
        fault_planes=[
            FaultPlane(axis="y", coordinate=0.0, bounds=[[-500.0, 500.0], None], tag=0),
            FaultPlane(axis="x", coordinate=0.0, bounds=[[0.0, 500.0], None], tag=1),
        ],
        kind=kind,
    )
    s0 = TCRACK_REMOTE_STRESS
    material = ElasticMaterial(E=1e4, nu=0.25, initial_stress=[0.0, s0, 0.0, 0.0, 0.0, 0.0])
    dirichlet = _rollers("xmin", x=0.0) + _rollers("ymin", y=0.0) + _rollers("zmin", "zmax", z=0.0)
    schedule = [
        LoadStep(
            label=float(k),
            dirichlet=dirichlet,
            neumann=[NeumannCondition(set="ymax", traction=[0.0, s0, 0.0])],
            fault_pressure={1: TCRACK_PRESSURE * k / steps},
        )
        for k in range(1, steps + 1)
    ]
    return ProblemDefinition(
        name="t-crack",
        mesh=mesh,
        materials={0: material},
        friction=FrictionParams.from_degrees(0.0, 30.0),
        steps=schedule,
    )


# ---------------------------------------------------------------------------
# Errors and studies
# ---------------------------------------------------------------------------


def fault_l2_error(
    numerical,
    analytic,
    weights,
    coordinate=None,
    interval: Optional[Tuple[float, float]] = None,
    trim_fraction: float = 1.0,
) -> float:
    """Weighted relative L2 error ||num - ana|| / ||ana||.

    With ``trim_fraction < 1`` only faces whose ``coordinate`` lies in the
    central fraction of ``interval`` contribute.
    """
    num = np.asarray(numerical, dtype=float)
    ana = np.asarray(analytic, dtype=float)
    w = np.asarray(weights, dtype=float)
    if num.size == 0:
        raise ValueError("fault profile is empty")
    if not 0.0 < trim_fraction <= 1.0:
        raise ValueError("trim fraction must lie in (0, 1]")
    keep = np.ones(num.shape, dtype=bool)
    if trim_fraction < 1.0:
        if coordinate is None or interval is None:
            raise ValueError("trimming needs the face coordinate and the fault interval")
        lo, hi = interval
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * trim_fraction
        keep = np.abs(np.asarray(coordinate, dtype=float) - mid) <= half
    ref = float(np.sqrt(np.sum(w[keep] * ana[keep] ** 2)))
    if ref == 0.0:
        raise AnalyticDomainError("reference profile has zero norm")
    return float(np.sqrt(np.sum(w[keep] * (num[keep] - ana[keep]) ** 2)) / ref)


def fit_rate(h: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(error) against log(h); None when fewer than two errors are positive."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    positive = e > 0
    if np.count_nonzero(positive) < 2:
        if np.any(positive):
            logger.warning("degenerate rate fit: only one level has a nonzero error")
        return None
    return float(np.polyfit(np.log(h[positive]), np.log(e[positive]), 1)[0])


def total_slip(result: ScheduleResult) -> np.ndarray:
    """Tangential jump magnitude accumulated over every step."""
    last = result.snapshots[-1].state
    return np.linalg.norm(last.g_T_prev + last.dg_T, axis=1)


@dataclass
class BenchmarkResult:
    record: BenchRecord
    report: SolveReport
    profiles: List[FaultProfileRecord] = field(default_factory=list)


def case_mesh_size(case: str, level: int) -> float:
    if level < 0:
        raise ValueError("refinement level must be non-negative")
    if case == "inclined-fault":
        return 0.25 * InclinedFaultParams().half_length / 2**level
    if case == "vertical-fault":
        return VerticalFaultParams().a / 2**level
    if case == "stick-slip-open":
        return 2.0 / 2**level
    if case == "constant-slip":
        return 1.0 / 2**level
    if case == "t-crack":
        return 10.0 * _tcrack_scale(level)
    raise ValueError(f"unknown benchmark case '{case}' (choose from {', '.join(CASES)})")


def _tcrack_scale(level: int) -> int:
    return (5, 2, 1)[min(level, 2)]


def build_case(case: str, kind="hex8", level: int = 0, scenario: str = "slip") -> ProblemDefinition:
    h = case_mesh_size(case, level)
    if case == "inclined-fault":
        return inclined_fault_case(InclinedFaultParams(), h, kind)
    if case == "vertical-fault":
        return vertical_fault_case(VerticalFaultParams(), h, kind, scenario)
    if case == "stick-slip-open":
        return stick_slip_open_case(kind, refinement=2**level)
    if case == "constant-slip":
        return constant_slip_case(kind, divisions=(10 * 2**level, 1, 10 * 2**level))
    return t_crack_case(_tcrack_scale(level), kind)


def _kkt_passed(result: ScheduleResult) -> bool:
    return all(s.kkt is None or s.kkt.all_passed for s in result.snapshots)


def _inclined_errors(result: ScheduleResult, params: InclinedFaultParams):
    mesh = result.system.mesh
    b = params.half_length
    xi = mesh.face_centroids()[:, 0] + b
    t_ana, slip_ana = inclined_fault_analytic(params, xi)
    area = mesh.faults.area
    err_t = fault_l2_error(result.state.t_N, t_ana, area, xi, (0.0, 2.0 * b), trim_fraction=0.9)
    err_s = fault_l2_error(total_slip(result), slip_ana, area)
    return err_t, err_s, xi


def _vertical_errors(stuck: ScheduleResult, sliding: ScheduleResult, params: VerticalFaultParams, h: float):
    mesh = stuck.system.mesh
    y = mesh.face_centroids()[:, 2]
    area = mesh.faults.area
    # skip faces next to the corners and the graded tails outside the refined band
    away = np.min(np.abs(np.abs(y)[:, None] - np.array([params.a, params.b])), axis=1) > h
    away &= np.abs(y) <= params.refined_half_width
    t_num = np.linalg.norm(stuck.state.t_T, axis=1)
    err_t = fault_l2_error(t_num[away], vertical_fault_analytic(params, y[away], "traction"), area[away])
    err_s = fault_l2_error(total_slip(sliding), vertical_fault_analytic(params, y, "slip"), area)
    return err_t, err_s, y


def run_benchmark(case: str, kind="hex8", level: int = 0, config: SolverConfig = SolverConfig()) -> BenchmarkResult:
    """Solve one case at one refinement level and compare with its reference where one exists."""
    h = case_mesh_size(case, level)
    err_t = err_s = None
    xi = None
    if case == "vertical-fault":
        stuck = solve_schedule(build_case(case, kind, level, "pre_slip"), config)
        result = solve_schedule(build_case(case, kind, level, "slip"), config)
        err_t, err_s, xi = _vertical_errors(stuck, result, VerticalFaultParams(), h)
        kkt = _kkt_passed(stuck) and _kkt_passed(result)
        report = result.report.model_copy(update={"steps": stuck.report.steps + result.report.steps})
    else:
        result = solve_schedule(build_case(case, kind, level), config)
        kkt = _kkt_passed(result)
        report = result.report
        if case == "inclined-fault":
            err_t, err_s, xi = _inclined_errors(result, InclinedFaultParams())
        elif case == "constant-slip":
            target = np.full(result.system.n_faces, math.hypot(*CONSTANT_SLIP_TOP[:2]))
            err_s = fault_l2_error(total_slip(result), target, result.system.mesh.faults.area)
    counts = result.state.counts()
    record = BenchRecord(
        case=case,
        kind=ElementKind.parse(kind).value,
        level=level,
        h=h,
        err_traction=err_t,
        err_slip=err_s,
        kkt_passed=kkt,
        uzawa=report.total_uzawa,
        newton=report.total_newton,
        krylov=report.total_krylov,
        **counts,
    )
    logger.info(
        "%s/%s level %d: err_traction=%s err_slip=%s kkt=%s",
        case, kind, level, err_t, err_s, "pass" if kkt else "FAIL",
    )
    profiles = fault_profile(result.system.mesh, result.snapshots[-1].state, xi)
    return BenchmarkResult(record=record, report=report, profiles=profiles)


def convergence_study(
    case: str,
    levels: int = 3,
    kinds: Sequence[str] = ("hex8",),
    config: SolverConfig = SolverConfig(),
    runner: Callable[..., BenchmarkResult] = run_benchmark,
) -> List[ErrorReport]:
    """Refine ``levels`` times per element kind and fit log-log rates of the traction and slip errors."""
    if case not in STUDY_CASES:
        raise ValueError(f"convergence study needs a case with a closed form ({', '.join(STUDY_CASES)})")
    if levels < 3:
        raise ValueError("convergence study needs at least three levels")
    reports = []
    for kind in kinds:
        h, err_t, err_s = [], [], []
        for level in range(levels):
            try:
                rec = runner(case, kind, level, config).record
            except NonConvergenceError as exc:
                raise NonConvergenceError(
                    f"{case}/{kind} level {level}: {exc}", exc.residual, exc.step, exc.snapshot
                ) from exc
            h.append(rec.h)
            err_t.append(rec.err_traction)
            err_s.append(rec.err_slip)
        report = ErrorReport(
            case=case,
            kind=ElementKind.parse(kind).value,
            h=h,
            err_traction=err_t,
            err_slip=err_s,
            rate_traction=fit_rate(h, err_t),
            rate_slip=fit_rate(h, err_s),
        )
        logger.info("%s/%s rates: traction %s, slip %s", case, kind, report.rate_traction, report.rate_slip)
        reports.append(report)
    return reports


def _scaled_penalty(problem: ProblemDefinition, factor: float) -> ProblemDefinition:
    penalty = problem.penalty
    update: Dict[str, float] = {"scale": penalty.scale * factor}
    if penalty.eps_N is not None:
        update["eps_N"] = penalty.eps_N * factor
    return problem.model_copy(update={"penalty": penalty.model_copy(update=update)})


def penalty_sweep(
    case: str,
    factors: Sequence[float] = SWEEP_FACTORS,
    variants: Sequence[Tuple[str, bool]] = SWEEP_VARIANTS,
    kind="hex8",
    level: int = 0,
    config: SolverConfig = SolverConfig(),
) -> List[SweepRecord]:
    """Iteration totals per penalty factor (relative to the default) and algorithm variant."""
    problem = build_case(case, kind, level)
    records = []
    for factor in factors:
        if not factor > 0:
            raise ValueError("penalty factors must be positive")
        scaled = _scaled_penalty(problem, factor)
        for variant, symmetric in variants:
            cfg = config.model_copy(update={"variant": variant, "symmetric": symmetric})
            try:
                report = solve_schedule(scaled, cfg).report
            except (NonConvergenceError, LinearSolverError) as exc:
                logger.warning("%s x%g %s%s failed: %s", case, factor, variant, " (symmetric)" if symmetric else "", exc)
                records.append(SweepRecord(case=case, factor=factor, variant=variant, symmetric=symmetric, converged=False))
                continue
            records.append(
                SweepRecord(
                    case=case,
                    factor=factor,
                    variant=variant,
                    symmetric=symmetric,
                    converged=report.converged,
                    uzawa=report.total_uzawa,
                    newton=report.total_newton,
                    krylov=report.total_krylov,
                )
            )
    return records
