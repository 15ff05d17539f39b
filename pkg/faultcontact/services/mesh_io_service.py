"""Line-oriented mesh text format.

Sections::

    NODES
    <id> <x> <y> <z>
    CELLS
    <id> <hex8|tet4|wedge6> <n0> ... <nk> <region>
    FAULT_FACES
    <id> <quad4|tri3> <minus nodes> <plus nodes> <minus cell> <plus cell> [tag]
    NODESET <name>
    <id> <id> ...
    FACESET <name>
    <cell> <local face>

Whitespace-delimited ASCII; ``#`` starts a comment.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from faultcontact.core.elements import FACE_NODES, ElementKind, FaceKind
from faultcontact.core.errors import ElementError, MeshError, MeshParseError
from faultcontact.core.mesh_models import MAX_FACE_NODES, FaultFaces, Mesh
from faultcontact.core.utils import atomic_write_text, format_float
from faultcontact.services.mesh_service import compute_face_frame, validate_mesh

logger = logging.getLogger(__name__)

SECTIONS = ("NODES", "CELLS", "FAULT_FACES", "NODESET", "FACESET")


def _int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MeshParseError(f"expected an integer, got {token!r}", line)


def _float(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MeshParseError(f"expected a number, got {token!r}", line)


def _dense(ids: List[int], what: str, line: int) -> None:
    if ids != list(range(len(ids))):
        raise MeshParseError(f"{what} ids must be dense and ordered from 0", line)


def _local_face(kind: ElementKind, cell_row: List[int], face_nodes: List[int]) -> Optional[int]:
    wanted = set(face_nodes)
    for f, local in enumerate(FACE_NODES[kind]):
        if {cell_row[i] for i in local} == wanted:
            return f
    return None


def parse_mesh(text: str) -> Mesh:
    nodes, node_ids = [], []
    cells, cell_kinds, cell_regions, cell_ids = [], [], [], []
    faces: List[tuple] = []
    node_sets: Dict[str, List[int]] = {}
    face_sets: Dict[str, List[List[int]]] = {}
    section, current, section_line = None, None, 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].upper()
        if head in SECTIONS:
            section, section_line = head, lineno
            if head in ("NODESET", "FACESET"):
                if len(tokens) != 2:
                    raise MeshParseError(f"{head} needs exactly one name", lineno)
                current = tokens[1]
                target = node_sets if head == "NODESET" else face_sets
                if current in target:
                    raise MeshParseError(f"duplicate {head.lower()} '{current}'", lineno)
                target[current] = []
            elif len(tokens) != 1:
                raise MeshParseError(f"unexpected tokens after {head}", lineno)
            continue
        if section is None:
            raise MeshParseError("data before the first section header", lineno)

        if section == "NODES":
            if len(tokens) != 4:
                raise MeshParseError("node lines need: id x y z", lineno)
            node_ids.append(_int(tokens[0], lineno))
            nodes.append([_float(t, lineno) for t in tokens[1:]])
        elif section == "CELLS":
            if len(tokens) < 3:
                raise MeshParseError("cell lines need: id kind nodes... region", lineno)
            try:
                kind = ElementKind.parse(tokens[1])
            except ElementError as exc:
                raise MeshParseError(str(exc), lineno)
            if len(tokens) != kind.n_nodes + 3:
                raise MeshParseError(f"{kind.value} cell needs {kind.n_nodes} nodes and a region", lineno)
            cell_ids.append(_int(tokens[0], lineno))
            cell_kinds.append(kind.code)
            cells.append([_int(t, lineno) for t in tokens[2 : 2 + kind.n_nodes]])
            cell_regions.append(_int(tokens[-1], lineno))
        elif section == "FAULT_FACES":
            try:
                fkind = FaceKind(tokens[1].lower()) if len(tokens) > 1 else None
            except ValueError:
                raise MeshParseError(f"unknown face kind {tokens[1]!r}", lineno)
            if fkind is None:
                raise MeshParseError("fault face lines need: id kind minus plus minus_cell plus_cell", lineno)
            k = 4 if fkind is FaceKind.QUAD4 else 3
            if len(tokens) not in (2 * k + 4, 2 * k + 5):
                raise MeshParseError(f"{fkind.value} fault face needs {2 * k + 4} or {2 * k + 5} fields", lineno)
            vals = [_int(t, lineno) for t in tokens[2:]]
            tag = vals[2 * k + 2] if len(vals) == 2 * k + 3 else 0
            faces.append((_int(tokens[0], lineno), vals[:k], vals[k : 2 * k], vals[2 * k], vals[2 * k + 1], tag, lineno))
        elif section == "NODESET":
            node_sets[current].extend(_int(t, lineno) for t in tokens)
        else:
            if len(tokens) != 2:
                raise MeshParseError("face set lines need: cell local_face", lineno)
            face_sets[current].append([_int(tokens[0], lineno), _int(tokens[1], lineno)])

    if not nodes:
        raise MeshParseError("missing NODES section", max(section_line, 1))
    if not cells:
        raise MeshParseError("missing CELLS section", max(section_line, 1))
    _dense(node_ids, "node", 1)
    _dense(cell_ids, "cell", 1)
    n_nodes = len(nodes)
    for row in cells:
        if min(row) < 0 or max(row) >= n_nodes:
            raise MeshError("cell references an unknown node")

    mesh = Mesh(
        nodes=np.asarray(nodes),
        cell_nodes=np.array([row + [-1] * (8 - len(row)) for row in cells], dtype=np.int64),
        cell_kind=np.asarray(cell_kinds),
        cell_region=np.asarray(cell_regions),
        node_sets={k: np.asarray(v, dtype=np.int64) for k, v in node_sets.items()},
        face_sets={k: np.asarray(v, dtype=np.int64).reshape(-1, 2) for k, v in face_sets.items()},
    )
    if faces:
        mesh = _attach_faces(mesh, faces)
    validate_mesh(mesh)
    logger.info("parsed mesh: %d cells, %d nodes, %d fault faces", mesh.n_cells, mesh.n_nodes, mesh.n_faces)
    return mesh


def _attach_faces(mesh: Mesh, faces: List[tuple]) -> Mesh:
    _dense([f[0] for f in faces], "fault face", faces[0][-1])
    nf = len(faces)
    minus_nodes = np.full((nf, MAX_FACE_NODES), -1, dtype=np.int64)
    plus_nodes = np.full((nf, MAX_FACE_NODES), -1, dtype=np.int64)
    cells = np.zeros((nf, 2), dtype=np.int64)
    local = np.zeros((nf, 2), dtype=np.int64)
    frames = np.zeros((nf, 3, 3))
    area = np.zeros(nf)
    tags = np.zeros(nf, dtype=np.int64)
    centroids = mesh.cell_centroids()
    for i, (fid, mn, pn, mc, pc, tag, lineno) in enumerate(faces):
        for c in (mc, pc):
            if not 0 <= c < mesh.n_cells:
                raise MeshParseError(f"fault face {fid} references unknown cell {c}", lineno)
        for j, (cell, side) in enumerate(((mc, mn), (pc, pn))):
            kind = mesh.kind_of(cell)
            lf = _local_face(kind, mesh.cell_node_list(cell).tolist(), side)
            if lf is None:
                raise MeshParseError(f"fault face {fid}: nodes {side} are not a face of cell {cell}", lineno)
            local[i, j] = lf
        k = len(mn)
        minus_nodes[i, :k] = mn
        plus_nodes[i, :k] = pn
        cells[i] = (mc, pc)
        tags[i] = tag
        frame = compute_face_frame(mesh.nodes[mn], centroids[mc], fid)
        frames[i] = frame.matrix()
        area[i] = frame.area
    faults = FaultFaces(
        minus_nodes=minus_nodes,
        plus_nodes=plus_nodes,
        minus_cell=cells[:, 0],
        plus_cell=cells[:, 1],
        minus_local_face=local[:, 0],
        plus_local_face=local[:, 1],
        frames=frames,
        area=area,
        tag=tags,
    )
    return Mesh(
        nodes=mesh.nodes,
        cell_nodes=mesh.cell_nodes,
        cell_kind=mesh.cell_kind,
        cell_region=mesh.cell_region,
        faults=faults,
        node_sets=mesh.node_sets,
        face_sets=mesh.face_sets,
    )


def load_mesh(path) -> Mesh:
    data = Path(path).read_bytes()
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise MeshParseError(f"non-ASCII content in {path}", data[: exc.start].count(b"\n") + 1)
    return parse_mesh(text)


def mesh_to_text(mesh: Mesh) -> str:
    out = ["# faultcontact mesh", "NODES"]
    out += [f"{i} " + " ".join(format_float(c) for c in xyz) for i, xyz in enumerate(mesh.nodes)]
    out.append("CELLS")
    for c in range(mesh.n_cells):
        nodes = " ".join(str(n) for n in mesh.cell_node_list(c))
        out.append(f"{c} {mesh.kind_of(c).value} {nodes} {mesh.cell_region[c]}")
    faults = mesh.faults
    if len(faults):
        out.append("FAULT_FACES")
        for f in range(len(faults)):
            mn = " ".join(str(n) for n in faults.side_nodes(f, False))
            pn = " ".join(str(n) for n in faults.side_nodes(f, True))
            out.append(
                f"{f} {faults.kind(f).value} {mn} {pn} {faults.minus_cell[f]} {faults.plus_cell[f]} {faults.tag[f]}"
            )
    for name, ids in sorted(mesh.node_sets.items()):
        out.append(f"NODESET {name}")
        out += [" ".join(str(i) for i in ids[k : k + 16]) for k in range(0, len(ids), 16)]
    for name, pairs in sorted(mesh.face_sets.items()):
        out.append(f"FACESET {name}")
        out += [f"{c} {lf}" for c, lf in pairs]
    return "\n".join(out) + "\n"


def save_mesh(mesh: Mesh, path) -> Path:
    return atomic_write_text(path, mesh_to_text(mesh))
