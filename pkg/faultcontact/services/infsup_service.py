"""Numerical inf-sup constant of the traction/displacement pair on a fault.

With piecewise-constant multipliers the constant is the square root of the
smallest eigenvalue of ``B X^-1 B^T mu = lambda M mu``. Here ``B`` couples
each face multiplier with the integrated displacement jump, ``X`` is the
scaled H1 norm matrix of the displacement space (bubbles included when
enriched) and ``M`` the mesh-dependent multiplier norm ``h_f |face|``.
"""

import logging
import warnings
from typing import List

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import LinearOperator, lobpcg, splu

from faultcontact.core import settings
from faultcontact.core.elements import ElementKind, shape_gradients, shape_values
from faultcontact.core.errors import MeshError
from faultcontact.core.mesh_models import Mesh
from faultcontact.core.quadrature import bubble_quadrature, standard_quadrature
from faultcontact.models.grid_models import FaultPlane
from faultcontact.models.report_models import InfSupRecord
from faultcontact.services.bubble_service import (
    bubble_gradient,
    bubble_trace_integrals,
    bubble_value,
    bubbles_by_cell,
)
from faultcontact.services.contact_service import build_jump_operators
from faultcontact.services.fem_service import cell_jacobians, cell_measures, physical_gradients
from faultcontact.services.mesh_service import build_structured_hex_grid

logger = logging.getLogger(__name__)


def _scalar_blocks(kind: ElementKind, coords: np.ndarray, local_faces, rule):
    """Gradient and mass matrices of one cell for the scalar basis (nodes, then bubbles)."""
    det, invJ = cell_jacobians(kind, coords[None], rule.points)
    N = np.atleast_2d(shape_values(kind, rule.points))
    dN = shape_gradients(kind, rule.points)
    if local_faces:
        N = np.hstack([N, np.column_stack([bubble_value(kind, lf, rule.points) for lf in local_faces])])
        db = np.stack([bubble_gradient(kind, lf, rule.points) for lf in local_faces], axis=1)
        dN = np.concatenate([dN, db], axis=1)
    grads = physical_gradients(dN, invJ)[0]
    w = det[0] * rule.weights
    return np.einsum("q,qai,qbi->ab", w, grads, grads), np.einsum("q,qa,qb->ab", w, N, N)


def norm_matrix(mesh: Mesh, enriched: bool) -> sp.csr_matrix:
    """Scaled H1 norm |u|_1^2 + diam^-2 ||u||_0^2 over nodal (and bubble) dofs."""
    carriers = bubbles_by_cell(mesh) if enriched else {}
    n_scalar = mesh.n_nodes + (2 * mesh.n_faces if enriched else 0)
    scale = 1.0 / mesh.diameter**2
    rows, cols, vals = [], [], []
    for cell in range(mesh.n_cells):
        kind = mesh.kind_of(cell)
        nodes = mesh.cell_node_list(cell)
        bubbles = carriers.get(cell, [])
        rule = bubble_quadrature(kind) if bubbles else standard_quadrature(kind)
        stiff, mass = _scalar_blocks(kind, mesh.nodes[nodes], [lf for _, lf in bubbles], rule)
        ids = np.concatenate([nodes, [mesh.n_nodes + beta for beta, _ in bubbles]]).astype(np.int64)
        r, c = np.meshgrid(ids, ids, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append((stiff + scale * mass).ravel())
    scalar = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n_scalar, n_scalar)
    ).tocsr()
    # dof 3 * i + c for scalar basis function i, component c
    return sp.kron(scalar, sp.identity(3), format="csr")


def _smallest_eigenvalue(B: sp.csr_matrix, X: sp.csr_matrix, m: np.ndarray, seed: int, dense_limit: int) -> float:
    """Smallest lambda of B X^-1 B^T mu = lambda diag(m) mu."""
    lu = splu(sp.csc_matrix(X))
    n = B.shape[0]
    if n <= dense_limit:
        S = B @ lu.solve(B.T.toarray())
        S = 0.5 * (S + S.T)
        return float(eigh(S, np.diag(m), eigvals_only=True, subset_by_index=[0, 0])[0])
    S = LinearOperator((n, n), matvec=lambda v: B @ lu.solve(B.T @ np.ravel(v)), dtype=float)
    start = np.random.default_rng(seed).standard_normal((n, max(1, min(settings.INFSUP_BLOCK, n // 5))))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        lam, _ = lobpcg(S, start, B=sp.diags(m), largest=False, tol=settings.INFSUP_RTOL, maxiter=settings.INFSUP_MAX_ITER)
    return float(np.min(lam))


def estimate_infsup(
    mesh: Mesh, enriched: bool = True, seed: int = 0, dense_limit: int = settings.INFSUP_DENSE_LIMIT
) -> float:
    """Discrete inf-sup constant with every fault face in the stick state.

    Up to ``dense_limit`` multiplier dofs the eigenproblem is solved densely;
    beyond that LOBPCG starts from a block drawn with ``seed``.
    """
    if mesh.n_faces == 0:
        raise MeshError("inf-sup estimate needs a mesh with fault faces")
    ops = build_jump_operators(mesh, bubble_trace_integrals(mesh) if enriched else None)
    B = (sp.diags(np.repeat(ops.area, 3)) @ ops.G).tocsr()
    X = norm_matrix(mesh, enriched)

    _, h = cell_measures(mesh)
    faults = mesh.faults
    h_face = 0.5 * (h[faults.minus_cell] + h[faults.plus_cell])
    lam = _smallest_eigenvalue(B, X, np.repeat(h_face * ops.area, 3), seed, dense_limit)
    beta = float(np.sqrt(max(lam, 0.0)))
    logger.debug("inf-sup estimate (%s): %.6e over %d faces", "enriched" if enriched else "plain", beta, len(faults))
    return beta


def two_block_mesh(divisions: int, kind="hex8") -> Mesh:
    """Unit cube cut in two by the plane z = 0.5 with ``divisions`` cells per edge (an even number).

    The cells stay cubes under refinement.
    """
    return build_structured_hex_grid(
        extents=(1.0, 1.0, 1.0),
        divisions=(divisions, divisions, divisions),
        fault_planes=[FaultPlane(axis="z", coordinate=0.5)],
        kind=kind,
    )


def infsup_study(levels: int = 3, kind="hex8", coarse_divisions: int = 2, seed: int = 0) -> List[InfSupRecord]:
    """Inf-sup constants with and without bubbles over successive uniform refinements."""
    if levels < 1:
        raise ValueError("inf-sup study needs at least one level")
    records = []
    for level in range(levels):
        n = coarse_divisions * 2**level
        mesh = two_block_mesh(n, kind)
        record = InfSupRecord(
            level=level,
            kind=ElementKind.parse(kind).value,
            h=1.0 / n,
            beta_enriched=estimate_infsup(mesh, enriched=True, seed=seed),
            beta_plain=estimate_infsup(mesh, enriched=False, seed=seed),
        )
        logger.info(
            "inf-sup level %d (h=%g): enriched %.4e, plain %.4e",
            level, record.h, record.beta_enriched, record.beta_plain,
        )
        records.append(record)
    return records
