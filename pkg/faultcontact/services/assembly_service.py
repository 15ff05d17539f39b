"""Global residual and Jacobian blocks over nodal and bubble dofs."""

import logging
from typing import Dict

import numpy as np
import scipy.sparse as sp

from faultcontact.core import settings
from faultcontact.core.mesh_models import Mesh
from faultcontact.core.quadrature import standard_quadrature
from faultcontact.core.system_models import (
    DiscreteSystem,
    FaceContactState,
    StepLoads,
    SystemBlocks,
)
from faultcontact.models.problem_models import (
    FrictionParams,
    LoadStep,
    PenaltyParams,
    PenaltySettings,
    ProblemDefinition,
)
from faultcontact.services.bubble_service import (
    bubble_clusters,
    bubble_trace_integrals,
    bubbles_by_cell,
    cell_bubble_matrices,
    cluster_structure,
)
from faultcontact.services.contact_service import (
    build_jump_operators,
    evaluate_tractions,
    fault_pressure_residual,
    interface_residual,
    interface_tangent,
)
from faultcontact.services.fem_service import (
    IDENTITY_VOIGT,
    cell_geometry,
    cell_measures,
    elasticity_tensor,
    neumann_load,
    stiffness_batch,
    strain_matrices,
)

logger = logging.getLogger(__name__)


def default_penalty(mesh: Mesh, cell_modulus: np.ndarray, settings_: PenaltySettings = PenaltySettings()) -> PenaltyParams:
    """eps_N = scale * mean(E) / mean(h) over the two parent cells, h = volume**(1/3); eps_T = ratio * eps_N."""
    faults = mesh.faults
    if settings_.eps_N is not None:
        eps_N = np.full(len(faults), settings_.eps_N)
    else:
        _, h = cell_measures(mesh)
        E = np.asarray(cell_modulus, dtype=float)
        pair = np.column_stack([faults.minus_cell, faults.plus_cell])
        eps_N = settings_.scale * E[pair].mean(axis=1) / h[pair].mean(axis=1)
    return PenaltyParams(eps_N=eps_N, eps_T=settings_.eps_T_ratio * eps_N)


def _cell_dofs(conn: np.ndarray) -> np.ndarray:
    return (3 * conn[:, :, None] + np.arange(3)).reshape(len(conn), -1)


def prepare_system(problem: ProblemDefinition) -> DiscreteSystem:
    """Precompute the linear bulk operator, eigenstress operator, jump map and penalties."""
    mesh = problem.mesh
    nf = mesh.n_faces
    enriched = problem.enriched and nf > 0
    n_u = mesh.n_dofs
    n_b = 6 * nf if enriched else 0
    regions = mesh.cell_region
    region_ids = sorted(problem.materials)
    C_region = {r: elasticity_tensor(problem.materials[r]) for r in region_ids}
    carriers = bubbles_by_cell(mesh) if enriched else {}

    k_rows, k_cols, k_vals = [], [], []
    e_rows, e_cols, e_vals = [], [], []

    def add(dofs: np.ndarray, cells: np.ndarray, Ke: np.ndarray, Ee: np.ndarray):
        k_rows.append(np.broadcast_to(dofs[:, :, None], Ke.shape).ravel())
        k_cols.append(np.broadcast_to(dofs[:, None, :], Ke.shape).ravel())
        k_vals.append(Ke.ravel())
        vcols = 6 * cells[:, None, None] + np.arange(6)
        e_rows.append(np.broadcast_to(dofs[:, :, None], Ee.shape).ravel())
        e_cols.append(np.broadcast_to(vcols, Ee.shape).ravel())
        e_vals.append(Ee.ravel())

    for kind, cells, conn in mesh.iter_kind_groups():
        plain = np.array([c not in carriers for c in cells], dtype=bool)
        if plain.any():
            ids, nodes = cells[plain], conn[plain]
            rule = standard_quadrature(kind)
            det, grads = cell_geometry(kind, mesh.nodes[nodes], rule, ids)
            B = strain_matrices(grads)
            wdet = det * rule.weights
            C = np.stack([C_region[int(r)] for r in regions[ids]])
            add(_cell_dofs(nodes), ids, stiffness_batch(B, wdet, C), np.einsum("cq,cqia->cai", wdet, B))
        for cell, nodes in zip(cells[~plain], conn[~plain]):
            bubbles = carriers[int(cell)]
            K_uu, K_ub, K_bb, E_u, E_b = cell_bubble_matrices(
                kind, mesh.nodes[nodes], [lf for _, lf in bubbles], C_region[int(regions[cell])]
            )
            bdofs = np.concatenate([n_u + 3 * beta + np.arange(3) for beta, _ in bubbles])
            dofs = np.concatenate([_cell_dofs(nodes[None])[0], bdofs])[None]
            Ke = np.block([[K_uu, K_ub], [K_ub.T, K_bb]])[None]
            add(dofs, np.array([cell]), Ke, np.vstack([E_u, E_b])[None])

    n = n_u + n_b
    K = sp.coo_matrix(
        (np.concatenate(k_vals), (np.concatenate(k_rows), np.concatenate(k_cols))), shape=(n, n)
    ).tocsr()
    eigen = sp.coo_matrix(
        (np.concatenate(e_vals), (np.concatenate(e_rows), np.concatenate(e_cols))), shape=(n, 6 * mesh.n_cells)
    ).tocsr()

    jumps = build_jump_operators(mesh, bubble_trace_integrals(mesh) if enriched else None)
    E_cell = np.array([problem.materials[int(r)].E for r in regions])
    penalty = default_penalty(mesh, E_cell, problem.penalty)
    clusters = bubble_clusters(mesh) if enriched else []
    structure = cluster_structure(mesh, clusters) if enriched else sp.coo_matrix((n_u, n_u))
    _, h = cell_measures(mesh)
    bubble_cell = (
        np.column_stack([mesh.faults.minus_cell, mesh.faults.plus_cell]).ravel() if enriched else np.zeros(0, dtype=np.int64)
    )
    logger.info(
        "prepared system: %d nodal dofs, %d bubble dofs, %d fault faces in %d cluster(s)",
        n_u, n_b, nf, len(clusters),
    )
    return DiscreteSystem(
        mesh=mesh,
        n_u=n_u,
        n_b=n_b,
        K=K,
        eigen_operator=eigen,
        jumps=jumps,
        eps_N=penalty.eps_N,
        eps_T=penalty.eps_T,
        clusters=clusters,
        structure=structure,
        bubble_cell=bubble_cell,
        reference_modulus=problem.reference_modulus,
        reference_size=float(np.mean(h)),
    )


def cell_stresses(problem: ProblemDefinition, step: LoadStep) -> np.ndarray:
    """Per-cell prescribed Voigt stress sigma0 - alpha p 1."""
    regions = problem.mesh.cell_region
    out = np.zeros((len(regions), 6))
    for r, mat in problem.materials.items():
        mask = regions == r
        p = step.reservoir_pressure.get(r, 0.0)
        out[mask] = np.asarray(mat.initial_stress) - mat.biot_alpha * p * IDENTITY_VOIGT
    return out


def dirichlet_arrays(mesh: Mesh, step: LoadStep):
    """Constrained dofs and values; later conditions override earlier ones on shared dofs."""
    values: Dict[int, float] = {}
    for bc in step.dirichlet:
        nodes = mesh.node_sets[bc.set]
        for comp, value in bc.components():
            for dof in (3 * nodes + comp).tolist():
                values[dof] = value
    dofs = np.array(sorted(values), dtype=np.int64)
    return dofs, np.array([values[d] for d in dofs.tolist()], dtype=float)


def step_loads(system: DiscreteSystem, problem: ProblemDefinition, step: LoadStep) -> StepLoads:
    mesh = system.mesh
    dofs, values = dirichlet_arrays(mesh, step)
    external = np.zeros(system.n_u)
    for load in step.neumann:
        external += neumann_load(mesh, mesh.face_sets[load.set], load.traction)
    eigen = system.eigen_operator @ cell_stresses(problem, step).ravel()
    pressure = (
        fault_pressure_residual(system.jumps, mesh.faults.tag, step.fault_pressure)
        if step.fault_pressure and mesh.n_faces
        else np.zeros(system.n_dofs)
    )
    return StepLoads(
        dirichlet_dofs=dofs,
        dirichlet_values=values,
        external=external,
        eigen=eigen,
        fault_pressure=pressure,
        label=step.label,
    )


def _keep_pattern(*mats, shape) -> sp.csr_matrix:
    coos = [m.tocoo() for m in mats]
    return sp.coo_matrix(
        (
            np.concatenate([c.data for c in coos]),
            (np.concatenate([c.row for c in coos]), np.concatenate([c.col for c in coos])),
        ),
        shape=shape,
    ).tocsr()


def assemble_global(
    system: DiscreteSystem,
    x: np.ndarray,
    state: FaceContactState,
    loads: StepLoads,
    friction: FrictionParams,
    symmetric: bool = False,
) -> SystemBlocks:
    """Residual r = K x + eigenstress - Neumann + interface tractions - fault pressure, and its Jacobian."""
    n_u = system.n_u
    g = system.jumps.averages(x)
    update = evaluate_tractions(
        state.traction, g, state.g_T_prev, system.eps_N, system.eps_T, friction, symmetric
    )
    r = system.K @ x + loads.eigen + loads.fault_pressure + interface_residual(system.jumps, update.t_hat)
    r[:n_u] -= loads.external
    A = (system.K + interface_tangent(system.jumps, update.tangent)).tocsr()
    return SystemBlocks(
        r_u=r[:n_u],
        r_b=r[n_u:],
        A_uu=_keep_pattern(A[:n_u, :n_u], system.structure, shape=(n_u, n_u)),
        A_ub=A[:n_u, n_u:].tocsr(),
        A_bu=A[n_u:, :n_u].tocsr(),
        A_bb=A[n_u:, n_u:].tocsr(),
        update=update,
    )


def residual_norm(blocks: SystemBlocks, free: np.ndarray) -> float:
    return float(np.sqrt(np.sum(blocks.r_u[free] ** 2) + np.sum(blocks.r_b**2)))


def reactions(blocks: SystemBlocks, loads: StepLoads) -> np.ndarray:
    """Residual at the constrained dofs: the forces the supports exert."""
    return blocks.r_u[loads.dirichlet_dofs]


def reaction_balance(blocks: SystemBlocks, loads: StepLoads) -> np.ndarray:
    """Per-component sum of reactions and applied Neumann forces; zero at equilibrium."""
    total = np.zeros(blocks.r_u.shape)
    total[loads.dirichlet_dofs] = reactions(blocks, loads)
    return total.reshape(-1, 3).sum(axis=0) + loads.external.reshape(-1, 3).sum(axis=0)
