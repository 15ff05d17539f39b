"""Reference elements: node layouts, face tables and trilinear/linear shape functions.

Conventions
-----------
* Hex8 lives on [-1, 1]^3 with VTK node order.
* Tet4 has vertices (0,0,0), (1,0,0), (0,1,0), (0,0,1); barycentrics
  l0 = 1 - x - y - z, l1 = x, l2 = y, l3 = z. Face i is opposite vertex i.
* Wedge6 is the triangle (xi, eta) times zeta in [-1, 1]; nodes 0-2 sit at
  zeta = -1 and nodes 3-5 above them at zeta = +1.
"""

from enum import Enum
from typing import Dict, Tuple

import numpy as np

from faultcontact.core.errors import ElementError

REF_TOL = 1e-12


class ElementKind(str, Enum):
    HEX8 = "hex8"
    TET4 = "tet4"
    WEDGE6 = "wedge6"

    @property
    def code(self) -> int:
        return KIND_ORDER.index(self)

    @property
    def n_nodes(self) -> int:
        return len(REFERENCE_NODES[self])

    @property
    def n_faces(self) -> int:
        return len(FACE_NODES[self])

    @classmethod
    def from_code(cls, code: int) -> "ElementKind":
        return KIND_ORDER[int(code)]

    @classmethod
    def parse(cls, value) -> "ElementKind":
        if isinstance(value, cls):
            return value
        name = str(value).lower()
        try:
            return cls(KIND_ALIASES.get(name, name))
        except ValueError:
            raise ElementError(f"unknown element kind {value!r}")


class FaceKind(str, Enum):
    QUAD4 = "quad4"
    TRI3 = "tri3"

    @classmethod
    def for_size(cls, n: int) -> "FaceKind":
        if n == 4:
            return cls.QUAD4
        if n == 3:
            return cls.TRI3
        raise ElementError(f"no face kind with {n} nodes")


KIND_ORDER = (ElementKind.HEX8, ElementKind.TET4, ElementKind.WEDGE6)
KIND_ALIASES = {"hex": "hex8", "tet": "tet4", "wedge": "wedge6"}

REFERENCE_NODES: Dict[ElementKind, np.ndarray] = {
    ElementKind.HEX8: np.array(
        [
            [-1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0],
            [1.0, 1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0],
            [-1.0, 1.0, 1.0],
        ]
    ),
    ElementKind.TET4: np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    ),
    ElementKind.WEDGE6: np.array(
        [
            [0.0, 0.0, -1.0],
            [1.0, 0.0, -1.0],
            [0.0, 1.0, -1.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
        ]
    ),
}

# Local face -> local nodes, cyclic order.
FACE_NODES: Dict[ElementKind, Tuple[Tuple[int, ...], ...]] = {
    ElementKind.HEX8: (
        (0, 4, 7, 3),  # x = -1
        (1, 2, 6, 5),  # x = +1
        (0, 1, 5, 4),  # y = -1
        (3, 7, 6, 2),  # y = +1
        (0, 3, 2, 1),  # z = -1
        (4, 5, 6, 7),  # z = +1
    ),
    ElementKind.TET4: (
        (1, 2, 3),
        (0, 3, 2),
        (0, 1, 3),
        (0, 2, 1),
    ),
    ElementKind.WEDGE6: (
        (0, 2, 1),  # zeta = -1
        (3, 4, 5),  # zeta = +1
        (0, 1, 4, 3),  # eta = 0
        (1, 2, 5, 4),  # xi + eta = 1
        (0, 3, 5, 2),  # xi = 0
    ),
}

REFERENCE_VOLUME = {
    ElementKind.HEX8: 8.0,
    ElementKind.TET4: 1.0 / 6.0,
    ElementKind.WEDGE6: 1.0,
}

# Corner parameters of the reference faces used for face integration.
QUAD_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
TRI_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def face_nodes(kind: ElementKind, local_face: int) -> Tuple[int, ...]:
    kind = ElementKind.parse(kind)
    faces = FACE_NODES[kind]
    if not 0 <= int(local_face) < len(faces):
        raise ElementError(f"{kind.value} has no local face {local_face}")
    return faces[int(local_face)]


def _as_points(ref_point) -> Tuple[np.ndarray, bool]:
    pts = np.asarray(ref_point, dtype=float)
    single = pts.ndim == 1
    return np.atleast_2d(pts), single


def check_inside(kind: ElementKind, points: np.ndarray, tol: float = REF_TOL) -> None:
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    if kind is ElementKind.HEX8:
        ok = np.all(np.abs(points) <= 1.0 + tol, axis=1)
    elif kind is ElementKind.TET4:
        ok = (x >= -tol) & (y >= -tol) & (z >= -tol) & (x + y + z <= 1.0 + tol)
    else:
        ok = (x >= -tol) & (y >= -tol) & (x + y <= 1.0 + tol) & (np.abs(z) <= 1.0 + tol)
    if not np.all(ok):
        bad = points[np.argmin(ok)]
        raise ElementError(f"point {bad.tolist()} lies outside the reference {kind.value}")


def shape_values(kind, ref_point) -> np.ndarray:
    """Nodal basis values at one point (n,) or at many points (q, n)."""
    kind = ElementKind.parse(kind)
    pts, single = _as_points(ref_point)
    check_inside(kind, pts)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    if kind is ElementKind.HEX8:
        ref = REFERENCE_NODES[kind]
        vals = 0.125 * (1 + np.outer(x, ref[:, 0])) * (1 + np.outer(y, ref[:, 1])) * (1 + np.outer(z, ref[:, 2]))
    elif kind is ElementKind.TET4:
        vals = np.column_stack([1.0 - x - y - z, x, y, z])
    else:
        lam = np.column_stack([1.0 - x - y, x, y])
        vals = np.hstack([lam * (0.5 * (1 - z))[:, None], lam * (0.5 * (1 + z))[:, None]])
    return vals[0] if single else vals


def shape_gradients(kind, ref_point) -> np.ndarray:
    """Reference gradients, (n, 3) at one point or (q, n, 3) at many."""
    kind = ElementKind.parse(kind)
    pts, single = _as_points(ref_point)
    check_inside(kind, pts)
    q = pts.shape[0]
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    if kind is ElementKind.HEX8:
        ref = REFERENCE_NODES[kind]
        fx = 1 + np.outer(x, ref[:, 0])
        fy = 1 + np.outer(y, ref[:, 1])
        fz = 1 + np.outer(z, ref[:, 2])
        grads = 0.125 * np.stack([ref[:, 0] * fy * fz, fx * ref[:, 1] * fz, fx * fy * ref[:, 2]], axis=-1)
    elif kind is ElementKind.TET4:
        base = np.array([[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        grads = np.broadcast_to(base, (q, 4, 3)).copy()
    else:
        lam = np.column_stack([1.0 - x - y, x, y])
        dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        grads = np.zeros((q, 6, 3))
        lo, hi = 0.5 * (1 - z), 0.5 * (1 + z)
        grads[:, :3, :2] = dlam[None] * lo[:, None, None]
        grads[:, 3:, :2] = dlam[None] * hi[:, None, None]
        grads[:, :3, 2] = -0.5 * lam
        grads[:, 3:, 2] = 0.5 * lam
    return grads[0] if single else grads


def face_shape_values(n_face_nodes: int, params: np.ndarray) -> np.ndarray:
    """Bilinear quad / linear triangle basis on the face parameter domain, (q, k)."""
    s, t = params[:, 0], params[:, 1]
    if n_face_nodes == 4:
        return 0.25 * (1 + np.outer(s, QUAD_CORNERS[:, 0])) * (1 + np.outer(t, QUAD_CORNERS[:, 1]))
    return np.column_stack([1.0 - s - t, s, t])


def face_shape_gradients(n_face_nodes: int, params: np.ndarray) -> np.ndarray:
    """Parameter derivatives (q, k, 2) of face_shape_values."""
    s, t = params[:, 0], params[:, 1]
    q = params.shape[0]
    if n_face_nodes == 4:
        c = QUAD_CORNERS
        ds = 0.25 * c[:, 0] * (1 + np.outer(t, c[:, 1]))
        dt = 0.25 * (1 + np.outer(s, c[:, 0])) * c[:, 1]
        return np.stack([ds, dt], axis=-1)
    base = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    return np.broadcast_to(base, (q, 3, 2)).copy()


def face_to_cell_points(kind: ElementKind, local_nodes, params: np.ndarray) -> np.ndarray:
    """Map face parameters to reference-cell coordinates.

    ``local_nodes`` lists the cell-local node indices of the face in the order
    the face parameterization uses; any cyclic order of the face corners works.
    """
    ref = REFERENCE_NODES[ElementKind.parse(kind)][list(local_nodes)]
    return face_shape_values(len(local_nodes), params) @ ref
