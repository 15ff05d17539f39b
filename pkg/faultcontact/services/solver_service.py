"""Linear and nonlinear drivers: Newton, Uzawa, interleaved multiplier updates, load stepping."""

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, gmres, spsolve_triangular, splu

from faultcontact.core import settings
from faultcontact.core.errors import LinearSolverError, NonConvergenceError
from faultcontact.core.system_models import ContactState, DiscreteSystem, FaceContactState, StepLoads, SystemBlocks
from faultcontact.models.problem_models import FrictionParams, KrylovConfig, ProblemDefinition, SolverConfig
from faultcontact.models.report_models import SolveReport, StepReport
from faultcontact.services.assembly_service import (
    assemble_global,
    prepare_system,
    residual_norm,
    step_loads,
)
from faultcontact.services.bubble_service import recover_bubble_increments, static_condense
from faultcontact.services.contact_service import (
    KKTReport,
    check_kkt,
    contact_state_from,
    evaluate_tractions,
    relative_traction_change,
)

logger = logging.getLogger(__name__)

NULLSPACE_HINT = "the system is singular; check that Dirichlet data removes every rigid-body mode"


class LinearSolveResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float


class NewtonResult(NamedTuple):
    x: np.ndarray
    iterations: int
    krylov: int
    residual: float
    r_ref: float
    converged: bool
    history: List[float]


@dataclass
class StepSnapshot:
    step: int
    label: float
    x: np.ndarray
    state: FaceContactState
    kkt: Optional[KKTReport] = None


@dataclass
class ScheduleResult:
    system: DiscreteSystem
    x: np.ndarray
    state: FaceContactState
    report: SolveReport
    snapshots: List[StepSnapshot] = field(default_factory=list)

    @property
    def u(self) -> np.ndarray:
        return self.x[: self.system.n_u]

    @property
    def traction(self) -> np.ndarray:
        return self.state.traction


# ---------------------------------------------------------------------------
# Linear solves
# ---------------------------------------------------------------------------


def sgs_preconditioner(A: sp.csr_matrix) -> LinearOperator:
    """Symmetric Gauss-Seidel sweep (D + L)^-1 D (D + U)^-1 as a linear operator."""
    A = sp.csr_matrix(A)
    d = A.diagonal()
    if np.any(d == 0):
        raise LinearSolverError("zero diagonal entry; " + NULLSPACE_HINT)
    lower = sp.tril(A, format="csr")
    upper = sp.triu(A, format="csr")

    def apply(r):
        y = spsolve_triangular(lower, np.asarray(r).ravel(), lower=True)
        return spsolve_triangular(upper, d * y, lower=False)

    return LinearOperator(A.shape, matvec=apply, dtype=float)


def _direct(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    try:
        lu = splu(sp.csc_matrix(A))
    except RuntimeError as exc:
        raise LinearSolverError(f"direct factorization failed ({exc}); " + NULLSPACE_HINT)
    pivots = np.abs(lu.U.diagonal())
    if pivots.size and pivots.min() <= settings.SINGULAR_PIVOT * pivots.max():
        raise LinearSolverError(NULLSPACE_HINT)
    return lu.solve(b)


def linear_solve(A, b, krylov: KrylovConfig = KrylovConfig(), symmetric: bool = False) -> LinearSolveResult:
    """Solve A x = b directly or with SGS-preconditioned GMRES / CG."""
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return LinearSolveResult(np.zeros_like(b), 0, 0.0)
    method = krylov.method
    if method == "auto":
        method = "direct" if A.shape[0] < settings.DIRECT_SOLVE_LIMIT else ("cg" if symmetric else "gmres")
    if method == "cg" and not symmetric:
        raise LinearSolverError("CG requires the symmetric variant")

    iterations = 0
    if method == "direct":
        x = _direct(A, b)
        iterations = 1
        info = 0
    else:
        M = sgs_preconditioner(A)
        count = [0]

        def callback(_):
            count[0] += 1

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            if method == "cg":
                x, info = cg(A, b, rtol=krylov.rtol, maxiter=krylov.max_iter, M=M, callback=callback)
            else:
                x, info = gmres(
                    A,
                    b,
                    rtol=krylov.rtol,
                    restart=krylov.restart,
                    maxiter=krylov.max_iter,
                    M=M,
                    callback=callback,
                    callback_type="pr_norm",
                )
        iterations = count[0]

    if not np.all(np.isfinite(x)):
        raise LinearSolverError("non-finite solution; " + NULLSPACE_HINT)
    residual = float(np.linalg.norm(A @ x - b)) / bnorm
    if info != 0:
        raise LinearSolverError(f"{method} did not converge in {krylov.max_iter} iterations", residual)
    logger.debug("%s solve: n=%d iterations=%d relative residual=%.3e", method, A.shape[0], iterations, residual)
    return LinearSolveResult(x, iterations, residual)


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------


def newton_atol(system: DiscreteSystem, config: SolverConfig) -> float:
    if config.newton_atol is not None:
        return config.newton_atol
    return settings.NEWTON_ABS_FACTOR * system.reference_modulus * system.reference_size**2


def newton_step(system: DiscreteSystem, blocks, free: np.ndarray, config: SolverConfig):
    """One condensed linear solve; returns (dx, krylov iterations)."""
    condensed = static_condense(system, blocks)
    A = condensed.A_hat[free][:, free]
    sol = linear_solve(A, -condensed.r_hat[free], config.krylov, config.symmetric)
    du = np.zeros(system.n_u)
    du[free] = sol.x
    db = recover_bubble_increments(condensed, blocks.r_b, du)
    return np.concatenate([du, db]), sol.iterations


class LineSearchResult(NamedTuple):
    x: np.ndarray
    blocks: SystemBlocks
    residual: float
    alpha: float


def line_search(
    system: DiscreteSystem,
    x: np.ndarray,
    dx: np.ndarray,
    residual: Optional[float],
    state: FaceContactState,
    loads: StepLoads,
    friction: FrictionParams,
    config: SolverConfig,
    free: np.ndarray,
) -> LineSearchResult:
    """Halve the step along ``dx`` until the residual norm decreases sufficiently.

    The full step is taken when ``residual`` is None or the search is disabled.
    Without a sufficient decrease the trial with the smallest residual is kept.
    """
    alpha = 1.0
    best: Optional[LineSearchResult] = None
    for _ in range(config.max_backtracks + 1):
        trial = x + alpha * dx
        blocks = assemble_global(system, trial, state, loads, friction, config.symmetric)
        trial_res = residual_norm(blocks, free)
        if residual is None or not config.line_search:
            return LineSearchResult(trial, blocks, trial_res, alpha)
        if trial_res <= (1.0 - settings.LINE_SEARCH_DECREASE * alpha) * residual:
            if alpha < 1.0:
                logger.debug("line search: step length %.4g", alpha)
            return LineSearchResult(trial, blocks, trial_res, alpha)
        if best is None or trial_res < best.residual:
            best = LineSearchResult(trial, blocks, trial_res, alpha)
        alpha *= 0.5
    logger.warning(
        "line search found no decrease in %d halvings (residual %.6e -> %.6e at step length %.4g)",
        config.max_backtracks, residual, best.residual, best.alpha,
    )
    return best


def newton_solve(
    system: DiscreteSystem,
    x: np.ndarray,
    state: FaceContactState,
    loads: StepLoads,
    friction: FrictionParams,
    config: SolverConfig,
    r_ref: Optional[float] = None,
    step: Optional[int] = None,
    min_iterations: int = 0,
) -> NewtonResult:
    """Newton iteration with the multipliers in ``state`` frozen.

    Converged when the residual over free nodal and bubble dofs is below
    max(newton_rtol * r_ref, atol); ``r_ref`` defaults to the first residual.
    At least ``min_iterations`` corrections are taken even when the starting
    point already meets the tolerance.
    """
    x = np.array(x, dtype=float)
    free = loads.free_dofs(system.n_u)
    atol = newton_atol(system, config)
    history: List[float] = []
    krylov = 0
    blocks = assemble_global(system, x, state, loads, friction, config.symmetric)
    res = residual_norm(blocks, free)
    if r_ref is None:
        r_ref = res
    tol = max(config.newton_rtol * r_ref, atol)
    for it in range(config.max_newton + 1):
        history.append(res)
        logger.debug("newton %d: residual %.6e (tol %.3e)", it, res, tol)
        if res <= tol and it >= min_iterations:
            return NewtonResult(x, it, krylov, res, r_ref, True, history)
        if it == config.max_newton:
            break
        dx, k = newton_step(system, blocks, free, config)
        krylov += k
        x, blocks, res, _ = line_search(
            system, x, dx, res if res > tol else None, state, loads, friction, config, free
        )
    raise NonConvergenceError(
        f"Newton did not converge in {config.max_newton} iterations", history[-1], step, snapshot=x
    )


# ---------------------------------------------------------------------------
# Multiplier loops
# ---------------------------------------------------------------------------


class StepOutcome(NamedTuple):
    x: np.ndarray
    state: FaceContactState
    report: StepReport


def _traction_floor(system: DiscreteSystem) -> float:
    return 1e-12 * system.reference_modulus


def uzawa_step(
    system: DiscreteSystem,
    x: np.ndarray,
    state: FaceContactState,
    loads: StepLoads,
    friction: FrictionParams,
    config: SolverConfig,
    step: int = 0,
) -> StepOutcome:
    """Outer multiplier loop around a Newton solve with frozen multipliers."""
    r_ref = None
    newton = krylov = 0
    change = np.inf
    for k in range(1, config.max_uzawa + 1):
        # every pass after a multiplier update takes at least one correction
        nr = newton_solve(system, x, state, loads, friction, config, r_ref, step, min_iterations=0 if k == 1 else 1)
        x, r_ref = nr.x, nr.r_ref
        newton += nr.iterations
        krylov += nr.krylov
        g = system.jumps.averages(x)
        update = evaluate_tractions(
            state.traction, g, state.g_T_prev, system.eps_N, system.eps_T, friction, config.symmetric, tangent=False
        )
        change = relative_traction_change(update.t_hat, state.traction, _traction_floor(system))
        state = contact_state_from(update, g, state)
        logger.debug("uzawa %d: relative traction change %.3e", k, change)
        if change <= config.uzawa_traction_tol and nr.converged:
            report = StepReport(
                step=step, label=loads.label, uzawa=k, newton=newton, krylov=krylov,
                residual=nr.residual, converged=True, states=state.counts(),
            )
            return StepOutcome(x, state, report)
    raise NonConvergenceError(
        f"Uzawa loop did not converge in {config.max_uzawa} iterations (traction change {change:.3e})",
        nr.residual,
        step,
        snapshot=state,
    )


def interleaved_step(
    system: DiscreteSystem,
    x: np.ndarray,
    state: FaceContactState,
    loads: StepLoads,
    friction: FrictionParams,
    config: SolverConfig,
    step: int = 0,
) -> StepOutcome:
    """Single loop updating the multipliers after every Newton correction.

    Converged when both the residual and the relative traction change are
    below their tolerances.
    """
    x = np.array(x, dtype=float)
    free = loads.free_dofs(system.n_u)
    atol = newton_atol(system, config)
    floor = _traction_floor(system)
    r_ref = None
    newton = krylov = updates = 0
    res = np.inf
    for it in range(config.max_interleaved + 1):
        blocks = assemble_global(system, x, state, loads, friction, config.symmetric)
        res = residual_norm(blocks, free)
        if r_ref is None:
            r_ref = res
        change = relative_traction_change(blocks.update.t_hat, state.traction, floor)
        logger.debug("interleaved %d: residual %.6e, traction change %.3e", it, res, change)
        tol = max(config.newton_rtol * r_ref, atol)
        if res <= tol and change <= config.uzawa_traction_tol:
            g = system.jumps.averages(x)
            state = contact_state_from(blocks.update, g, state)
            report = StepReport(
                step=step, label=loads.label, uzawa=updates, newton=newton, krylov=krylov,
                residual=res, converged=True, states=state.counts(),
            )
            return StepOutcome(x, state, report)
        if it == config.max_interleaved:
            break
        dx, k = newton_step(system, blocks, free, config)
        x = line_search(system, x, dx, res if res > tol else None, state, loads, friction, config, free).x
        newton += 1
        krylov += k
        g = system.jumps.averages(x)
        update = evaluate_tractions(
            state.traction, g, state.g_T_prev, system.eps_N, system.eps_T, friction, config.symmetric, tangent=False
        )
        state = contact_state_from(update, g, state)
        updates += 1
    raise NonConvergenceError(
        f"interleaved loop did not converge in {config.max_interleaved} iterations", res, step, snapshot=state
    )


# ---------------------------------------------------------------------------
# Load schedule
# ---------------------------------------------------------------------------


def solve_schedule(problem: ProblemDefinition, config: SolverConfig = SolverConfig(), system: Optional[DiscreteSystem] = None) -> ScheduleResult:
    """Run every load step with the configured algorithm, carrying multipliers and slip history."""
    system = system or prepare_system(problem)
    x = np.zeros(system.n_dofs)
    state = FaceContactState.initial(system.n_faces)
    report = SolveReport(variant=config.variant, symmetric=config.symmetric)
    snapshots: List[StepSnapshot] = []
    driver = uzawa_step if config.variant == "uzawa" else interleaved_step
    for i, step in enumerate(problem.steps):
        loads = step_loads(system, problem, step)
        x[loads.dirichlet_dofs] = loads.dirichlet_values
        x, state, step_report = driver(system, x, state, loads, problem.friction, config, i)
        kkt = check_kkt(state, problem.friction, system.eps_N) if len(state) else None
        report.steps.append(step_report)
        snapshots.append(StepSnapshot(i, step.label, x.copy(), state, kkt))
        logger.info(
            "step %d (t=%g): uzawa=%d newton=%d krylov=%d states=%s",
            i, step.label, step_report.uzawa, step_report.newton, step_report.krylov, step_report.states,
        )
        state = state.with_(g_T_prev=state.g_T_prev + state.dg_T)
    report.final_states = ContactState.labels(state.state)
    logger.info(report.summary())
    return ScheduleResult(system=system, x=x, state=state, report=report, snapshots=snapshots)


def uzawa_solve(problem: ProblemDefinition, config: SolverConfig = SolverConfig()) -> ScheduleResult:
    return solve_schedule(problem, config.model_copy(update={"variant": "uzawa"}))


def interleaved_solve(problem: ProblemDefinition, config: SolverConfig = SolverConfig()) -> ScheduleResult:
    return solve_schedule(problem, config.model_copy(update={"variant": "interleaved"}))
