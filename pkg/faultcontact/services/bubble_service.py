"""Face bubbles on both sides of every fault face, and their static condensation.

Bubble ``beta = 2 * face + side`` (side 0 = minus, 1 = plus) lives in the
parent cell of that side and carries three vector dofs ``3 * beta + c``,
numbered after the nodal dofs.
"""

import logging
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lu_factor, lu_solve

from faultcontact.core import settings
from faultcontact.core.elements import ElementKind, check_inside, face_nodes, face_to_cell_points, shape_gradients
from faultcontact.core.errors import SingularBlockError
from faultcontact.core.mesh_models import Mesh
from faultcontact.core.quadrature import QuadratureRule, bubble_quadrature, face_quadrature
from faultcontact.core.system_models import (
    BlockFactor,
    CondensedSystem,
    DiscreteSystem,
    FaceContactState,
    SystemBlocks,
)
from faultcontact.models.problem_models import ElasticMaterial, FrictionParams, PenaltyParams
from faultcontact.services.contact_service import (
    build_jump_operators,
    evaluate_tractions,
    fault_pressure_residual,
    interface_residual,
    interface_tangent,
)
from faultcontact.services.fem_service import (
    cell_jacobians,
    elasticity_tensor,
    face_integration,
    physical_gradients,
    stiffness_batch,
    strain_matrices,
)

logger = logging.getLogger(__name__)

# Wedge quadrilateral faces: the two triangle vertices on each face's edge.
WEDGE_QUAD_EDGES = {2: (0, 1), 3: (1, 2), 4: (0, 2)}


def _barycentrics(kind: ElementKind, pts: np.ndarray):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    if kind is ElementKind.TET4:
        lam = np.column_stack([1.0 - x - y - z, x, y, z])
        dlam = np.array([[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    else:
        lam = np.column_stack([1.0 - x - y, x, y])
        dlam = np.array([[-1.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return lam, dlam


def _bubble(kind, local_face: int, ref_point, gradient: bool):
    kind = ElementKind.parse(kind)
    face_nodes(kind, local_face)
    pts = np.asarray(ref_point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    check_inside(kind, pts)
    q = len(pts)
    f = int(local_face)

    if kind is ElementKind.HEX8:
        a, sign = divmod(f, 2)
        sign = 2 * sign - 1
        others = [b for b in range(3) if b != a]
        lin = 0.5 * (1.0 + sign * pts[:, a])
        quad = [1.0 - pts[:, b] ** 2 for b in others]
        val = lin * quad[0] * quad[1]
        grad = np.zeros((q, 3))
        grad[:, a] = 0.5 * sign * quad[0] * quad[1]
        grad[:, others[0]] = lin * (-2.0 * pts[:, others[0]]) * quad[1]
        grad[:, others[1]] = lin * quad[0] * (-2.0 * pts[:, others[1]])
    elif kind is ElementKind.TET4:
        lam, dlam = _barycentrics(kind, pts)
        idx = [i for i in range(4) if i != f]
        val = lam[:, idx[0]] * lam[:, idx[1]] * lam[:, idx[2]]
        grad = (
            np.outer(lam[:, idx[1]] * lam[:, idx[2]], dlam[idx[0]])
            + np.outer(lam[:, idx[0]] * lam[:, idx[2]], dlam[idx[1]])
            + np.outer(lam[:, idx[0]] * lam[:, idx[1]], dlam[idx[2]])
        )
    else:
        lam, dlam = _barycentrics(kind, pts)
        zeta = pts[:, 2]
        if f in (0, 1):
            sign = 2 * f - 1
            lin = 0.5 * (1.0 + sign * zeta)
            prod = lam[:, 0] * lam[:, 1] * lam[:, 2]
            dprod = (
                np.outer(lam[:, 1] * lam[:, 2], dlam[0])
                + np.outer(lam[:, 0] * lam[:, 2], dlam[1])
                + np.outer(lam[:, 0] * lam[:, 1], dlam[2])
            )
            val = lin * prod
            grad = lin[:, None] * dprod
            grad[:, 2] += 0.5 * sign * prod
        else:
            i, j = WEDGE_QUAD_EDGES[f]
            quad = 1.0 - zeta**2
            prod = lam[:, i] * lam[:, j]
            val = quad * prod
            grad = quad[:, None] * (np.outer(lam[:, j], dlam[i]) + np.outer(lam[:, i], dlam[j]))
            grad[:, 2] += -2.0 * zeta * prod
    out = grad if gradient else val
    return out[0] if single else out


def bubble_value(kind, local_face: int, ref_point):
    """Face bubble of ``local_face`` at reference point(s); zero on every other cell face."""
    return _bubble(kind, local_face, ref_point, gradient=False)


def bubble_gradient(kind, local_face: int, ref_point):
    return _bubble(kind, local_face, ref_point, gradient=True)


# ---------------------------------------------------------------------------
# Geometry of the enrichment
# ---------------------------------------------------------------------------


def side_local_nodes(mesh: Mesh, face: int, plus: bool) -> List[int]:
    """Cell-local node indices of one side of a fault face, in fault-face node order."""
    faults = mesh.faults
    cell = faults.plus_cell[face] if plus else faults.minus_cell[face]
    row = mesh.cell_node_list(cell).tolist()
    return [row.index(int(n)) for n in faults.side_nodes(face, plus)]


def bubble_trace_integrals(mesh: Mesh) -> np.ndarray:
    """(nf, 2) integrals of the minus and plus bubble traces over each fault face."""
    faults = mesh.faults
    out = np.zeros((len(faults), 2))
    for f in range(len(faults)):
        nodes = faults.side_nodes(f, False)
        rule = face_quadrature(len(nodes), bubble=True)
        _, dA, _ = face_integration(mesh.nodes[nodes], rule)
        for side in (0, 1):
            plus = bool(side)
            cell = faults.plus_cell[f] if plus else faults.minus_cell[f]
            local_face = faults.plus_local_face[f] if plus else faults.minus_local_face[f]
            kind = mesh.kind_of(cell)
            ref = face_to_cell_points(kind, side_local_nodes(mesh, f, plus), rule.points)
            out[f, side] = bubble_value(kind, local_face, ref) @ dA
    return out


def bubble_parents(mesh: Mesh) -> Tuple[np.ndarray, np.ndarray]:
    """Parent cell and local face of every bubble."""
    faults = mesh.faults
    cells = np.column_stack([faults.minus_cell, faults.plus_cell]).ravel()
    local = np.column_stack([faults.minus_local_face, faults.plus_local_face]).ravel()
    return cells.astype(np.int64), local.astype(np.int64)


def cell_bubble_matrices(
    kind,
    coords: np.ndarray,
    local_faces,
    C: np.ndarray,
    rule: Optional[QuadratureRule] = None,
):
    """Bulk blocks of one cell carrying bubbles on ``local_faces``.

    Returns (K_uu, K_ub, K_bb, E_u, E_b) where E_* integrate B^T against a
    unit Voigt stress, so the eigenstress load is E @ s.
    """
    kind = ElementKind.parse(kind)
    rule = rule or bubble_quadrature(kind)
    coords = np.asarray(coords, dtype=float)[None]
    det, invJ = cell_jacobians(kind, coords, rule.points)
    dN = shape_gradients(kind, rule.points)
    dN = dN[None] if dN.ndim == 2 else dN
    db = np.stack([bubble_gradient(kind, lf, rule.points) for lf in local_faces], axis=1)
    grads = physical_gradients(np.concatenate([dN, db], axis=1), invJ)
    B = strain_matrices(grads)
    wdet = det * rule.weights
    K = stiffness_batch(B, wdet, C)[0]
    E = np.einsum("cq,cqia->ai", wdet, B)
    n = 3 * kind.n_nodes
    return K[:n, :n], K[:n, n:], K[n:, n:], E[:n], E[n:]


# ---------------------------------------------------------------------------
# Clusters and condensation
# ---------------------------------------------------------------------------


def bubble_clusters(mesh: Mesh) -> List[np.ndarray]:
    """Fault faces grouped so that faces sharing a parent cell land in one group."""
    faults = mesh.faults
    nf = len(faults)
    parent = list(range(nf))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {}
    for f in range(nf):
        for cell in (int(faults.minus_cell[f]), int(faults.plus_cell[f])):
            if cell in owner:
                a, b = find(owner[cell]), find(f)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[cell] = f
    groups = {}
    for f in range(nf):
        groups.setdefault(find(f), []).append(f)
    return [np.asarray(g, dtype=np.int64) for _, g in sorted(groups.items())]


def cluster_dofs(mesh: Mesh, faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(bubble dofs relative to the bubble block, nodal dofs) of one cluster."""
    faults = mesh.faults
    beta = np.sort(np.concatenate([2 * faces, 2 * faces + 1]))
    bdofs = (3 * beta[:, None] + np.arange(3)).ravel()
    cells = np.unique(np.concatenate([faults.minus_cell[faces], faults.plus_cell[faces]]))
    nodes = np.unique(np.concatenate([mesh.cell_node_list(c) for c in cells]))
    udofs = (3 * nodes[:, None] + np.arange(3)).ravel()
    return bdofs, udofs


def cluster_structure(mesh: Mesh, clusters: List[np.ndarray]) -> sp.coo_matrix:
    """Explicit zeros on every node pair a cluster couples, so condensation adds no fill-in."""
    rows, cols = [], []
    for faces in clusters:
        _, udofs = cluster_dofs(mesh, faces)
        r, c = np.meshgrid(udofs, udofs, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
    n = mesh.n_dofs
    if not rows:
        return sp.coo_matrix((n, n))
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    return sp.coo_matrix((np.zeros(len(rows)), (rows, cols)), shape=(n, n))


class BubbleBlocks(NamedTuple):
    A_bb: sp.csr_matrix
    A_bu: sp.csr_matrix
    A_ub: sp.csr_matrix
    r_b: np.ndarray


def _triplets(rows: np.ndarray, cols: np.ndarray, block: np.ndarray):
    r, c = np.meshgrid(rows, cols, indexing="ij")
    return r.ravel(), c.ravel(), np.asarray(block).ravel()


def _sparse(triplets, shape) -> sp.csr_matrix:
    if not triplets:
        return sp.csr_matrix(shape)
    rows, cols, vals = (np.concatenate(parts) for parts in zip(*triplets))
    return sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()


def assemble_bubble_blocks(
    mesh: Mesh,
    materials: Dict[int, ElasticMaterial],
    state: FaceContactState,
    penalties: PenaltyParams,
    friction: FrictionParams,
    x: np.ndarray,
    symmetric: bool = False,
    stresses: Optional[np.ndarray] = None,
    fault_pressure: Optional[Dict[int, float]] = None,
) -> BubbleBlocks:
    """Bubble rows and columns of the Jacobian, and the bubble residual.

    The bulk part comes from the bubble stiffness of every parent cell; the
    interface part from the augmented traction and its tangent on each face,
    evaluated at ``x`` with the multipliers of ``state``. ``stresses`` holds
    one Voigt eigenstress per cell and ``fault_pressure`` maps fault tags to
    a pressure acting on both faces.
    """
    n_u, n_b = mesh.n_dofs, 6 * mesh.n_faces
    x = np.asarray(x, dtype=float)
    u, u_b = x[:n_u], x[n_u:]
    C_region = {int(r): elasticity_tensor(m) for r, m in materials.items()}
    bb, bu = [], []
    r_b = np.zeros(n_b)
    for cell, bubbles in bubbles_by_cell(mesh).items():
        nodes = mesh.cell_node_list(cell)
        _, K_ub, K_bb, _, E_b = cell_bubble_matrices(
            mesh.kind_of(cell), mesh.nodes[nodes], [lf for _, lf in bubbles], C_region[int(mesh.cell_region[cell])]
        )
        bdofs = np.concatenate([3 * beta + np.arange(3) for beta, _ in bubbles])
        udofs = (3 * nodes[:, None] + np.arange(3)).ravel()
        bb.append(_triplets(bdofs, bdofs, K_bb))
        bu.append(_triplets(bdofs, udofs, K_ub.T))
        r_b[bdofs] += K_ub.T @ u[udofs] + K_bb @ u_b[bdofs]
        if stresses is not None:
            r_b[bdofs] += E_b @ stresses[cell]

    jumps = build_jump_operators(mesh, bubble_trace_integrals(mesh))
    update = evaluate_tractions(
        state.traction, jumps.averages(x), state.g_T_prev, penalties.eps_N, penalties.eps_T, friction, symmetric
    )
    T = interface_tangent(jumps, update.tangent).tocsr()
    r_b += interface_residual(jumps, update.t_hat)[n_u:]
    if fault_pressure:
        r_b += fault_pressure_residual(jumps, mesh.faults.tag, fault_pressure)[n_u:]
    bulk_bu = _sparse(bu, (n_b, n_u))
    return BubbleBlocks(
        A_bb=(_sparse(bb, (n_b, n_b)) + T[n_u:, n_u:]).tocsr(),
        A_bu=(bulk_bu + T[n_u:, :n_u]).tocsr(),
        A_ub=(bulk_bu.T + T[:n_u, n_u:]).tocsr(),
        r_b=r_b,
    )


def _factor(block: np.ndarray, faces: np.ndarray):
    if not np.all(np.isfinite(block)):
        raise SingularBlockError(faces)
    lu, piv = lu_factor(block, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= settings.SINGULAR_PIVOT * max(pivots.max(), np.finfo(float).tiny):
        raise SingularBlockError(faces)
    return lu, piv


def static_condense(system: DiscreteSystem, blocks: SystemBlocks) -> CondensedSystem:
    """Schur complement on the nodal dofs, cluster by cluster.

    The result keeps every stored position of A_uu and only adds values on
    positions the structural zeros of A_uu already hold.
    """
    A_uu = blocks.A_uu.tocoo()
    if system.n_b == 0:
        return CondensedSystem(A_hat=blocks.A_uu.tocsr(), r_hat=blocks.r_u.copy(), factors=[])
    A_bu = blocks.A_bu.tocsr()
    A_ub = blocks.A_ub.tocsc()
    r_hat = blocks.r_u.copy()
    rows, cols, vals = [A_uu.row], [A_uu.col], [A_uu.data]
    factors = []
    for faces in system.clusters:
        bdofs, udofs = cluster_dofs(system.mesh, faces)
        A_bb = blocks.A_bb[bdofs][:, bdofs].toarray()
        bu = A_bu[bdofs][:, udofs].toarray()
        ub = A_ub[:, bdofs][udofs, :].toarray()
        lu = _factor(A_bb, faces)
        X = lu_solve(lu, bu, check_finite=False)
        z = lu_solve(lu, blocks.r_b[bdofs], check_finite=False)
        r_hat[udofs] -= ub @ z
        r, c = np.meshgrid(udofs, udofs, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(-(ub @ X).ravel())
        factors.append(BlockFactor(faces=faces, bubble_dofs=bdofs, node_dofs=udofs, lu=lu, A_bu=bu))
    n = system.n_u
    A_hat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return CondensedSystem(A_hat=A_hat, r_hat=r_hat, factors=factors)


def recover_bubble_increments(condensed: CondensedSystem, r_b: np.ndarray, delta_u: np.ndarray) -> np.ndarray:
    """delta_u_b = -A_bb^-1 (r_b + A_bu delta_u), cluster by cluster."""
    delta_b = np.zeros(len(r_b))
    for block in condensed.factors:
        rhs = r_b[block.bubble_dofs] + block.A_bu @ delta_u[block.node_dofs]
        delta_b[block.bubble_dofs] = -lu_solve(block.lu, rhs, check_finite=False)
    return delta_b


def bubbles_by_cell(mesh: Mesh):
    """Map parent cell -> list of (bubble index, local face), in bubble order."""
    cells, local = bubble_parents(mesh)
    out = {}
    for beta, (cell, lf) in enumerate(zip(cells, local)):
        out.setdefault(int(cell), []).append((beta, int(lf)))
    return out

