"""Mesh construction: structured grids, conforming subdivision, fault splitting, frames."""

import logging
from collections import Counter
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from faultcontact.core import settings
from faultcontact.core.elements import FACE_NODES, ElementKind
from faultcontact.core.errors import DegenerateFaceError, GridAlignmentError, ManifoldError, MeshError
from faultcontact.core.mesh_models import MAX_FACE_NODES, FaultFaces, Mesh
from faultcontact.models.grid_models import AXES, FaultPlane, GridSpec, RegionBox
from faultcontact.services.fem_service import check_cells

logger = logging.getLogger(__name__)

FaceSelector = Callable[[np.ndarray], bool]

# Six tetrahedra around the 0-6 diagonal; consistent for translated cubes.
HEX_TO_TETS = ((0, 1, 2, 6), (0, 2, 3, 6), (0, 3, 7, 6), (0, 7, 4, 6), (0, 4, 5, 6), (0, 5, 1, 6))
# x-z quad split along 0-5, extruded along y.
HEX_TO_WEDGES = ((0, 1, 5, 3, 2, 6), (0, 5, 4, 3, 6, 7))


class FaceFrame(NamedTuple):
    normal: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    area: float

    def matrix(self) -> np.ndarray:
        return np.vstack([self.normal, self.m1, self.m2])


class FaceTable(NamedTuple):
    cell: np.ndarray  # (F,)
    local: np.ndarray  # (F,)
    nodes: np.ndarray  # (F, 4) padded
    group: np.ndarray  # (F,) index of the geometric face shared by coincident entries
    count: np.ndarray  # (G,) number of entries per group


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


def compute_face_frame(face_coords, minus_centroid=None, face_id: int = -1, tol: Optional[float] = None) -> FaceFrame:
    """Orthonormal frame (n_f, m_1, m_2) and area of a planar face.

    n_f points away from the minus cell; m_1 is the normalized projection of
    the global axis least aligned with n_f (ties broken x, y, z); m_2 = n_f x m_1.
    """
    X = np.asarray(face_coords, dtype=float)
    if len(X) == 4:
        cross = 0.5 * np.cross(X[2] - X[0], X[3] - X[1])
        area = 0.5 * (
            np.linalg.norm(np.cross(X[1] - X[0], X[2] - X[0])) + np.linalg.norm(np.cross(X[2] - X[0], X[3] - X[0]))
        )
    elif len(X) == 3:
        cross = 0.5 * np.cross(X[1] - X[0], X[2] - X[0])
        area = float(np.linalg.norm(cross))
    else:
        raise MeshError(f"face {face_id} has {len(X)} nodes")
    size = float(np.max(np.linalg.norm(X - X.mean(axis=0), axis=1)))
    tol = settings.COINCIDENCE_TOL if tol is None else tol
    if not np.isfinite(area) or area <= tol * max(size, 1e-300) ** 2 or size == 0.0:
        raise DegenerateFaceError(face_id, float(area))
    n = cross / np.linalg.norm(cross)
    if minus_centroid is not None and np.dot(X.mean(axis=0) - np.asarray(minus_centroid, dtype=float), n) < 0:
        n = -n
    axis = int(np.argmin(np.round(np.abs(n), 12)))
    e = np.zeros(3)
    e[axis] = 1.0
    m1 = e - np.dot(e, n) * n
    m1 /= np.linalg.norm(m1)
    m2 = np.cross(n, m1)
    return FaceFrame(n, m1, m2, float(area))


def frame_defects(frames: np.ndarray) -> np.ndarray:
    """|n.m1| + |n.m2| + |m1.m2| per face."""
    n, m1, m2 = frames[:, 0], frames[:, 1], frames[:, 2]
    return (
        np.abs(np.einsum("fi,fi->f", n, m1))
        + np.abs(np.einsum("fi,fi->f", n, m2))
        + np.abs(np.einsum("fi,fi->f", m1, m2))
    )


# ---------------------------------------------------------------------------
# Face topology
# ---------------------------------------------------------------------------


def face_table(mesh: Mesh) -> FaceTable:
    cells, locals_, rows = [], [], []
    for kind, ids, conn in mesh.iter_kind_groups():
        for f, local_nodes in enumerate(FACE_NODES[kind]):
            nodes = np.full((len(ids), MAX_FACE_NODES), -1, dtype=np.int64)
            nodes[:, : len(local_nodes)] = conn[:, list(local_nodes)]
            cells.append(ids)
            locals_.append(np.full(len(ids), f, dtype=np.int64))
            rows.append(nodes)
    if not rows:
        empty = np.zeros(0, dtype=np.int64)
        return FaceTable(empty, empty, np.zeros((0, MAX_FACE_NODES), dtype=np.int64), empty, empty)
    cell = np.concatenate(cells)
    local = np.concatenate(locals_)
    nodes = np.vstack(rows)
    order = np.lexsort((local, cell))
    cell, local, nodes = cell[order], local[order], nodes[order]
    keys = np.sort(nodes, axis=1)
    _, group, count = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    return FaceTable(cell, local, nodes, group.reshape(-1), count)


def interior_pairs(table: FaceTable) -> np.ndarray:
    """(P, 2) entry indices of faces shared by exactly two cells, ordered by group."""
    order = np.argsort(table.group, kind="stable")
    starts = np.concatenate([[0], np.cumsum(table.count)[:-1]])
    groups = np.flatnonzero(table.count == 2)
    return np.column_stack([order[starts[groups]], order[starts[groups] + 1]])


def boundary_entries(table: FaceTable) -> np.ndarray:
    return np.flatnonzero(table.count[table.group] == 1)


def _face_normal(X: np.ndarray) -> np.ndarray:
    if len(X) == 4:
        return np.cross(X[2] - X[0], X[3] - X[1])
    return np.cross(X[1] - X[0], X[2] - X[0])


def _canonical(n: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(n))
    for c in n:
        if abs(c) > 1e-12 * scale:
            return n if c > 0 else -n
    return n


def _incidence(cell_nodes: np.ndarray, n_nodes: int):
    """CSR node -> cells incidence."""
    rows, cols = np.nonzero(cell_nodes >= 0)
    nodes = cell_nodes[rows, cols]
    order = np.argsort(nodes, kind="stable")
    ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(ptr, nodes + 1, 1)
    return np.cumsum(ptr), rows[order]


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self):
        out: Dict[int, List[int]] = {}
        for i in self.parent:
            out.setdefault(self.find(i), []).append(i)
        return sorted((sorted(g) for g in out.values()), key=lambda g: g[0])


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------


def split_fault_nodes(mesh: Mesh, face_selector: FaceSelector, tag: int = 0) -> Mesh:
    """Duplicate the nodes of the selected interior faces and create fault faces.

    Around every node of the selection, the incident cells are grouped into
    components connected through non-selected shared faces; each component
    beyond the one holding the minus side receives its own copy. Nodes on the
    rim of a fault ending inside the mesh therefore stay shared.
    """
    table = face_table(mesh)
    pairs = interior_pairs(table)
    coords = mesh.nodes
    selected = []
    for e1, e2 in pairs:
        row = table.nodes[e1]
        if face_selector(coords[row[row >= 0]]):
            selected.append((e1, e2))
    if not selected:
        return mesh

    edges = Counter()
    for e1, _ in selected:
        row = table.nodes[e1]
        row = row[row >= 0]
        for a, b in zip(row, np.roll(row, -1)):
            edges[(min(a, b), max(a, b))] += 1
    for edge, count in sorted(edges.items()):
        if count > 2:
            raise ManifoldError(edge, count)

    centroids = mesh.cell_centroids()
    minus_plus = []
    for e1, e2 in selected:
        row = table.nodes[e1]
        X = coords[row[row >= 0]]
        n = _canonical(_face_normal(X))
        if np.dot(centroids[table.cell[e1]] - X.mean(axis=0), n) < 0:
            minus_plus.append((e1, e2))
        else:
            minus_plus.append((e2, e1))

    selected_groups = {int(table.group[e1]) for e1, _ in selected}
    link_faces: Dict[int, List[tuple]] = {}
    for e1, e2 in pairs:
        if int(table.group[e1]) in selected_groups:
            continue
        row = table.nodes[e1]
        for v in row[row >= 0]:
            link_faces.setdefault(int(v), []).append((int(table.cell[e1]), int(table.cell[e2])))

    ptr, inc = _incidence(mesh.cell_nodes, mesh.n_nodes)
    first_minus: Dict[int, int] = {}
    for em, _ in minus_plus:
        row = table.nodes[em]
        for v in row[row >= 0]:
            first_minus.setdefault(int(v), int(table.cell[em]))

    conn = np.array(mesh.cell_nodes)
    new_coords: List[np.ndarray] = []
    origin: List[int] = []
    remap: Dict[tuple, int] = {}
    next_id = mesh.n_nodes
    for v in sorted(first_minus):
        cells = inc[ptr[v] : ptr[v + 1]].tolist()
        uf = _UnionFind(cells)
        for a, b in link_faces.get(v, ()):
            uf.union(a, b)
        components = uf.groups()
        if len(components) < 2:
            continue
        keep = first_minus[v]
        for comp in components:
            if keep in comp:
                continue
            for c in comp:
                pos = np.flatnonzero(conn[c] == v)
                conn[c, pos] = next_id
                remap[(c, v)] = next_id
            new_coords.append(coords[v])
            origin.append(v)
            next_id += 1

    old = mesh.faults
    if len(old):
        mn = np.array(old.minus_nodes)
        pn = np.array(old.plus_nodes)
        for f in range(len(old)):
            for arr, cell in ((mn, old.minus_cell[f]), (pn, old.plus_cell[f])):
                for j in range(MAX_FACE_NODES):
                    key = (int(cell), int(arr[f, j]))
                    if key in remap:
                        arr[f, j] = remap[key]
        old = old.with_nodes(mn, pn)

    nodes = np.vstack([coords] + [np.atleast_2d(c) for c in new_coords]) if new_coords else np.array(coords)
    nf = len(minus_plus)
    minus_nodes = np.full((nf, MAX_FACE_NODES), -1, dtype=np.int64)
    plus_nodes = np.full((nf, MAX_FACE_NODES), -1, dtype=np.int64)
    minus_cell = np.zeros(nf, dtype=np.int64)
    plus_cell = np.zeros(nf, dtype=np.int64)
    minus_local = np.zeros(nf, dtype=np.int64)
    plus_local = np.zeros(nf, dtype=np.int64)
    frames = np.zeros((nf, 3, 3))
    area = np.zeros(nf)
    base_id = len(old)
    for i, (em, ep) in enumerate(minus_plus):
        cm, cp = int(table.cell[em]), int(table.cell[ep])
        lm, lp = int(table.local[em]), int(table.local[ep])
        pos_m = list(FACE_NODES[mesh.kind_of(cm)][lm])
        pos_p = list(FACE_NODES[mesh.kind_of(cp)][lp])
        old_m = mesh.cell_nodes[cm, pos_m]
        old_p = list(mesh.cell_nodes[cp, pos_p])
        ordered_p = [pos_p[old_p.index(v)] for v in old_m]
        k = len(pos_m)
        minus_nodes[i, :k] = conn[cm, pos_m]
        plus_nodes[i, :k] = conn[cp, ordered_p]
        minus_cell[i], plus_cell[i] = cm, cp
        minus_local[i], plus_local[i] = lm, lp
        frame = compute_face_frame(nodes[minus_nodes[i, :k]], centroids[cm], base_id + i)
        frames[i] = frame.matrix()
        area[i] = frame.area

    added = FaultFaces(
        minus_nodes=minus_nodes,
        plus_nodes=plus_nodes,
        minus_cell=minus_cell,
        plus_cell=plus_cell,
        minus_local_face=minus_local,
        plus_local_face=plus_local,
        frames=frames,
        area=area,
        tag=np.full(nf, tag, dtype=np.int64),
    )
    node_sets = {}
    origin_arr = np.asarray(origin, dtype=np.int64)
    for name, ids in mesh.node_sets.items():
        extra = mesh.n_nodes + np.flatnonzero(np.isin(origin_arr, ids))
        node_sets[name] = np.concatenate([ids, extra])
    logger.info(
        "split %d fault face(s) with tag %d: %d node(s) duplicated", nf, tag, len(origin)
    )
    return Mesh(
        nodes=nodes,
        cell_nodes=conn,
        cell_kind=mesh.cell_kind,
        cell_region=mesh.cell_region,
        faults=old.concatenate(added),
        node_sets=node_sets,
        face_sets=dict(mesh.face_sets),
    )


# ---------------------------------------------------------------------------
# Structured grids
# ---------------------------------------------------------------------------


def graded_grid_lines(inner_half_width: float, spacing: float, outer_half_width: float, growth: float = 1.3) -> np.ndarray:
    """Symmetric 1D grid: uniform inside [-inner, inner], geometric growth out to +-outer."""
    if not 0 < spacing <= inner_half_width <= outer_half_width or growth < 1.0:
        raise MeshError("graded grid needs 0 < spacing <= inner <= outer and growth >= 1")
    n = max(1, int(round(inner_half_width / spacing)))
    h = inner_half_width / n
    right = list(np.linspace(0.0, inner_half_width, n + 1))
    d = h
    while outer_half_width - right[-1] > 1e-12 * outer_half_width:
        d *= growth
        nxt = right[-1] + d
        if outer_half_width - nxt < 0.5 * d:
            nxt = outer_half_width
        right.append(min(nxt, outer_half_width))
    right = np.asarray(right)
    return np.concatenate([-right[:0:-1], right])


def _axis_lines(spec: GridSpec) -> List[np.ndarray]:
    lines = []
    for a in range(3):
        given = spec.grid_lines[a] if spec.grid_lines is not None else None
        if given is not None:
            lines.append(np.asarray(given, dtype=float))
        else:
            lines.append(spec.origin[a] + np.linspace(0.0, spec.extents[a], spec.divisions[a] + 1))
    return lines


def _orient(kind: ElementKind, nodes: np.ndarray, conn: np.ndarray) -> np.ndarray:
    X = nodes[conn]
    vol = np.einsum("ci,ci->c", np.cross(X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]), X[:, 3] - X[:, 0])
    flip = vol < 0
    conn = conn.copy()
    if kind is ElementKind.TET4:
        conn[np.ix_(flip, [1, 2])] = conn[np.ix_(flip, [2, 1])]
    elif kind is ElementKind.WEDGE6:
        conn[np.ix_(flip, [1, 2, 4, 5])] = conn[np.ix_(flip, [2, 1, 5, 4])]
    return conn


def subdivide_hexes(nodes: np.ndarray, hexes: np.ndarray, kind) -> tuple:
    """Split hexahedra into tets or wedges; returns (connectivity, parent hex index)."""
    kind = ElementKind.parse(kind)
    if kind is ElementKind.HEX8:
        return hexes, np.arange(len(hexes))
    pattern = HEX_TO_TETS if kind is ElementKind.TET4 else HEX_TO_WEDGES
    conn = np.vstack([hexes[:, list(p)] for p in pattern])
    parent = np.concatenate([np.arange(len(hexes))] * len(pattern))
    order = np.lexsort((np.repeat(np.arange(len(pattern)), len(hexes)), parent))
    return _orient(kind, nodes, conn[order]), parent[order]


def _plane_selector(plane: FaultPlane, tol: float) -> FaceSelector:
    a = plane.axis_index
    others = plane.in_plane_axes
    bounds = plane.bounds or [None, None]

    def select(X: np.ndarray) -> bool:
        if np.any(np.abs(X[:, a] - plane.coordinate) > tol):
            return False
        c = X.mean(axis=0)
        for axis, rng in zip(others, bounds):
            if rng is not None and not (rng[0] - tol <= c[axis] <= rng[1] + tol):
                return False
        return True

    return select


def box_sets(mesh: Mesh, tol: Optional[float] = None):
    """Node and boundary-face sets for the six sides of the bounding box."""
    lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
    tol = settings.GRID_TOL * max(mesh.diameter, 1.0) if tol is None else tol
    table = face_table(mesh)
    bnd = boundary_entries(table)
    rows = table.nodes[bnd]
    mask = rows >= 0
    coords = mesh.nodes[np.where(mask, rows, 0)]
    node_sets, face_sets = {}, {}
    for a, axis in enumerate(AXES):
        for side, value in (("min", lo[a]), ("max", hi[a])):
            name = f"{axis}{side}"
            node_sets[name] = np.flatnonzero(np.abs(mesh.nodes[:, a] - value) <= tol)
            on_side = np.all(~mask | (np.abs(coords[..., a] - value) <= tol), axis=1)
            hits = bnd[on_side]
            face_sets[name] = np.column_stack([table.cell[hits], table.local[hits]]).astype(np.int64)
    return node_sets, face_sets


def assign_regions(centroids: np.ndarray, boxes: Sequence[RegionBox], tol: float = 0.0) -> np.ndarray:
    region = np.zeros(len(centroids), dtype=np.int64)
    for box in boxes:
        inside = np.all((centroids >= np.asarray(box.lower) - tol) & (centroids <= np.asarray(box.upper) + tol), axis=1)
        region[inside] = box.region
    return region


def build_structured_hex_grid(
    extents=(1.0, 1.0, 1.0),
    divisions=(1, 1, 1),
    fault_planes: Sequence[FaultPlane] = (),
    region_boxes: Sequence[RegionBox] = (),
    origin=(0.0, 0.0, 0.0),
    grid_lines=None,
    kind="hex8",
) -> Mesh:
    """Box mesh with optional axis-aligned fault planes split into fault faces."""
    spec = GridSpec(
        extents=list(extents),
        divisions=list(divisions),
        origin=list(origin),
        grid_lines=grid_lines,
        kind=ElementKind.parse(kind).value,
        fault_planes=list(fault_planes),
        region_boxes=list(region_boxes),
    )
    return build_from_spec(spec)


def build_from_spec(spec: GridSpec) -> Mesh:
    lines = _axis_lines(spec)
    nx, ny, nz = (len(l) - 1 for l in lines)
    Z, Y, X = np.meshgrid(lines[2], lines[1], lines[0], indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def nid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    K, J, I = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    I, J, K = I.ravel(), J.ravel(), K.ravel()
    hexes = np.column_stack(
        [
            nid(I, J, K), nid(I + 1, J, K), nid(I + 1, J + 1, K), nid(I, J + 1, K),
            nid(I, J, K + 1), nid(I + 1, J, K + 1), nid(I + 1, J + 1, K + 1), nid(I, J + 1, K + 1),
        ]
    )
    kind = ElementKind.parse(spec.kind)
    conn, _ = subdivide_hexes(nodes, hexes, kind)
    centroids = nodes[conn].mean(axis=1)
    span = max(l[-1] - l[0] for l in lines)
    tol = settings.GRID_TOL * span
    mesh = Mesh(
        nodes=nodes,
        cell_nodes=conn,
        cell_kind=np.full(len(conn), kind.code),
        cell_region=assign_regions(centroids, spec.region_boxes, tol),
    )
    for plane in spec.fault_planes:
        grid = lines[plane.axis_index]
        nearest = float(grid[np.argmin(np.abs(grid - plane.coordinate))])
        if abs(nearest - plane.coordinate) > tol:
            raise GridAlignmentError(plane.axis, plane.coordinate, nearest)
        if nearest in (grid[0], grid[-1]):
            raise MeshError(f"fault plane {plane.axis} = {plane.coordinate} lies on the domain boundary")
        mesh = split_fault_nodes(mesh, _plane_selector(plane, tol), plane.tag)
    node_sets, face_sets = box_sets(mesh, tol)
    mesh = mesh.with_sets(node_sets, face_sets)
    validate_mesh(mesh)
    logger.info(
        "built %s grid %dx%dx%d: %d cells, %d nodes, %d fault faces",
        kind.value, nx, ny, nz, mesh.n_cells, mesh.n_nodes, mesh.n_faces,
    )
    return mesh


# ---------------------------------------------------------------------------
# Extrusion
# ---------------------------------------------------------------------------


def extrude_triangulation(points, triangles, thickness: float, layers: int = 1, regions=None, axis: str = "y") -> Mesh:
    """Extrude a 2D triangulation into wedges.

    The 2D coordinates (u, v) are placed on the two axes other than ``axis``
    (for axis="y": x = u, z = v) and copied ``layers`` times along ``axis``.
    """
    P = np.asarray(points, dtype=float)
    T = np.asarray(triangles, dtype=np.int64)
    if P.ndim != 2 or P.shape[1] != 2 or T.ndim != 2 or T.shape[1] != 3:
        raise MeshError("extrusion needs (n, 2) points and (m, 3) triangles")
    if layers < 1 or thickness <= 0:
        raise MeshError("extrusion needs layers >= 1 and a positive thickness")
    if T.size and (T.min() < 0 or T.max() >= len(P)):
        raise MeshError("triangle references an unknown point")
    a = AXES.index(axis)
    plane_axes = [i for i in range(3) if i != a]
    levels = np.linspace(0.0, thickness, layers + 1)
    nodes = np.zeros(((layers + 1) * len(P), 3))
    for l, level in enumerate(levels):
        block = nodes[l * len(P) : (l + 1) * len(P)]
        block[:, plane_axes[0]] = P[:, 0]
        block[:, plane_axes[1]] = P[:, 1]
        block[:, a] = level
    conn = np.vstack(
        [np.hstack([T + l * len(P), T + (l + 1) * len(P)]) for l in range(layers)]
    )
    conn = _orient(ElementKind.WEDGE6, nodes, conn)
    region = np.tile(np.zeros(len(T), dtype=np.int64) if regions is None else np.asarray(regions), layers)
    mesh = Mesh(nodes=nodes, cell_nodes=conn, cell_kind=np.full(len(conn), ElementKind.WEDGE6.code), cell_region=region)
    node_sets, face_sets = box_sets(mesh)
    mesh = mesh.with_sets(node_sets, face_sets)
    validate_mesh(mesh)
    return mesh


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_mesh(mesh: Mesh) -> None:
    """Check every mesh invariant; raises a MeshError subclass on the first violation."""
    if not np.all(np.isfinite(mesh.nodes)):
        raise MeshError("node coordinates must be finite")
    for kind, cells, conn in mesh.iter_kind_groups():
        full = mesh.cell_nodes[cells]
        if np.any(conn < 0) or np.any(full[:, kind.n_nodes :] >= 0):
            bad = cells[np.argmax(np.any(conn < 0, axis=1) | np.any(full[:, kind.n_nodes :] >= 0, axis=1))]
            raise MeshError(f"cell {bad} does not have {kind.n_nodes} nodes")
        if conn.size and conn.max() >= mesh.n_nodes:
            raise MeshError("cell references an unknown node")
    check_cells(mesh)

    faults = mesh.faults
    if not len(faults):
        return
    diam = mesh.diameter
    for f in range(len(faults)):
        if faults.area[f] <= 0:
            raise DegenerateFaceError(f, float(faults.area[f]))
        if faults.minus_cell[f] == faults.plus_cell[f]:
            raise MeshError(f"fault face {f} has the same cell on both sides")
        m = faults.side_nodes(f, False)
        p = faults.side_nodes(f, True)
        if len(m) != len(p):
            raise MeshError(f"fault face {f} has mismatched side node lists")
        if np.max(np.abs(mesh.nodes[m] - mesh.nodes[p])) > settings.COINCIDENCE_TOL * diam:
            raise MeshError(f"fault face {f}: minus and plus copies are not coincident")
        for side, cell in ((m, faults.minus_cell[f]), (p, faults.plus_cell[f])):
            if not np.all(np.isin(side, mesh.cell_node_list(cell))):
                raise MeshError(f"fault face {f}: side nodes are not on their parent cell")
    defects = frame_defects(faults.frames)
    norms = np.linalg.norm(faults.frames, axis=2)
    handed = np.linalg.norm(np.cross(faults.frames[:, 1], faults.frames[:, 2]) - faults.frames[:, 0], axis=1)
    bad = np.flatnonzero((defects > 3 * settings.FRAME_TOL) | np.any(np.abs(norms - 1) > settings.FRAME_TOL, axis=1) | (handed > 3 * settings.FRAME_TOL))
    if bad.size:
        raise MeshError(f"fault face {bad[0]} has a non-orthonormal or left-handed frame")
    pairs = sorted(
        {
            (int(a), int(b))
            for a, b in zip(faults.minus_nodes.ravel(), faults.plus_nodes.ravel())
            if a >= 0 and a != b
        }
    )
    ptr, inc = _incidence(mesh.cell_nodes, mesh.n_nodes)
    for a, b in pairs:
        shared = np.intersect1d(inc[ptr[a] : ptr[a + 1]], inc[ptr[b] : ptr[b + 1]])
        if shared.size:
            raise MeshError(f"cell {shared[0]} references both copies ({a}, {b}) of a split node")
