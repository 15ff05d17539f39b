"""Bulk elasticity: constitutive matrix, cell geometry and element integrals.

Voigt order is xx, yy, zz, yz, xz, xy with engineering shear strains, so the
virtual work density of a stress vector ``s`` is ``B^T s``.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from faultcontact.core.elements import (
    ElementKind,
    face_shape_gradients,
    face_shape_values,
    shape_gradients,
)
from faultcontact.core.errors import InvertedCellError
from faultcontact.core.mesh_models import Mesh
from faultcontact.core.quadrature import QuadratureRule, face_quadrature, standard_quadrature
from faultcontact.models.problem_models import ElasticMaterial

logger = logging.getLogger(__name__)

IDENTITY_VOIGT = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


def elasticity_tensor(mat: ElasticMaterial) -> np.ndarray:
    lam, mu = mat.lame
    C = np.zeros((6, 6))
    C[:3, :3] = lam
    C[np.arange(3), np.arange(3)] = lam + 2 * mu
    C[np.arange(3, 6), np.arange(3, 6)] = mu
    return C


def cell_jacobians(
    kind: ElementKind, coords: np.ndarray, points: np.ndarray, cell_ids: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Jacobian determinants (nc, q) and inverse Jacobians (nc, q, 3, 3) at reference points.

    Raises InvertedCellError for the first cell with a non-positive determinant.
    """
    dN = shape_gradients(kind, points)
    if dN.ndim == 2:
        dN = dN[None]
    J = np.einsum("cni,qnj->cqij", coords, dN)
    det = np.linalg.det(J)
    if np.any(det <= 0):
        bad = int(np.argmin(det.min(axis=1)))
        cid = int(cell_ids[bad]) if cell_ids is not None else bad
        raise InvertedCellError(cid, float(det[bad].min()))
    return det, np.linalg.inv(J)


def physical_gradients(ref_grads: np.ndarray, invJ: np.ndarray) -> np.ndarray:
    """Map reference gradients (q, m, 3) to physical ones (nc, q, m, 3)."""
    return np.einsum("qmj,cqji->cqmi", ref_grads, invJ)


def cell_geometry(
    kind: ElementKind, coords: np.ndarray, rule: QuadratureRule, cell_ids: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Jacobian determinants (nc, q) and physical shape gradients (nc, q, n, 3)."""
    det, invJ = cell_jacobians(kind, coords, rule.points, cell_ids)
    dN = shape_gradients(kind, rule.points)
    if dN.ndim == 2:
        dN = dN[None]
    return det, physical_gradients(dN, invJ)


def strain_matrices(grads: np.ndarray) -> np.ndarray:
    """Strain-displacement matrices (..., 6, 3n) from physical gradients (..., n, 3)."""
    shape = grads.shape[:-2]
    n = grads.shape[-2]
    B = np.zeros(shape + (6, 3 * n))
    gx, gy, gz = grads[..., 0], grads[..., 1], grads[..., 2]
    B[..., 0, 0::3] = gx
    B[..., 1, 1::3] = gy
    B[..., 2, 2::3] = gz
    B[..., 3, 1::3] = gz
    B[..., 3, 2::3] = gy
    B[..., 4, 0::3] = gz
    B[..., 4, 2::3] = gx
    B[..., 5, 0::3] = gy
    B[..., 5, 1::3] = gx
    return B


def stiffness_batch(B: np.ndarray, wdet: np.ndarray, C: np.ndarray) -> np.ndarray:
    """sum_q w det B^T C B for each cell; C is (6, 6) or (nc, 6, 6)."""
    if C.ndim == 2:
        return np.einsum("cq,cqia,ij,cqjb->cab", wdet, B, C, B)
    return np.einsum("cq,cqia,cij,cqjb->cab", wdet, B, C, B)


def element_stiffness(coords, kind, mat: ElasticMaterial, rule: Optional[QuadratureRule] = None) -> np.ndarray:
    kind = ElementKind.parse(kind)
    rule = rule or standard_quadrature(kind)
    coords = np.asarray(coords, dtype=float)[None]
    det, grads = cell_geometry(kind, coords, rule)
    B = strain_matrices(grads)
    return stiffness_batch(B, det * rule.weights, elasticity_tensor(mat))[0]


def element_eigenstress_load(coords, kind, stress, rule: Optional[QuadratureRule] = None) -> np.ndarray:
    """Residual contribution of a prescribed stress (sigma0 - alpha p 1): integral of B^T s."""
    kind = ElementKind.parse(kind)
    rule = rule or standard_quadrature(kind)
    coords = np.asarray(coords, dtype=float)[None]
    det, grads = cell_geometry(kind, coords, rule)
    B = strain_matrices(grads)
    s = np.asarray(stress, dtype=float)
    if s.shape == (3, 3):
        s = np.array([s[0, 0], s[1, 1], s[2, 2], s[1, 2], s[0, 2], s[0, 1]])
    return np.einsum("cq,cqia,i->a", det * rule.weights, B, s)


def cell_measures(mesh: Mesh) -> Tuple[np.ndarray, np.ndarray]:
    """Per-cell volume and characteristic size volume**(1/3)."""
    vol = np.zeros(mesh.n_cells)
    for kind, cells, conn in mesh.iter_kind_groups():
        rule = standard_quadrature(kind)
        det, _ = cell_geometry(kind, mesh.nodes[conn], rule, cells)
        vol[cells] = det @ rule.weights
    return vol, np.cbrt(vol)


def check_cells(mesh: Mesh) -> None:
    for kind, cells, conn in mesh.iter_kind_groups():
        cell_geometry(kind, mesh.nodes[conn], standard_quadrature(kind), cells)


def face_integration(coords: np.ndarray, rule: QuadratureRule):
    """Face shape values (q, k), surface measure weights (q,) and points (q, 3)."""
    k = len(coords)
    N = face_shape_values(k, rule.points)
    dN = face_shape_gradients(k, rule.points)
    a_s = np.einsum("qk,ki->qi", dN[..., 0], coords)
    a_t = np.einsum("qk,ki->qi", dN[..., 1], coords)
    dA = np.linalg.norm(np.cross(a_s, a_t), axis=1) * rule.weights
    return N, dA, N @ coords


def neumann_load(mesh: Mesh, faces: np.ndarray, traction) -> np.ndarray:
    """External force vector of a uniform traction on (cell, local face) pairs."""
    f = np.zeros(mesh.n_dofs)
    t = np.asarray(traction, dtype=float)
    for cell, local in np.asarray(faces, dtype=np.int64).reshape(-1, 2):
        nodes = mesh.cell_face_nodes(cell, local)
        N, dA, _ = face_integration(mesh.nodes[nodes], face_quadrature(len(nodes)))
        w = N.T @ dA
        for a, node in enumerate(nodes):
            f[3 * node : 3 * node + 3] += w[a] * t
    return f
