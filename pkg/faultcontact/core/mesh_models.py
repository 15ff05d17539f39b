"""Mesh data model: nodes, cells, split-node fault faces, named sets.

Arrays are stored flat and padded so groups of cells of one kind can be
processed together; ``Mesh`` instances are treated as immutable once built.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Tuple

import numpy as np

from faultcontact.core.elements import ElementKind, FaceKind, FACE_NODES

MAX_CELL_NODES = 8
MAX_FACE_NODES = 4


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FaultFaces:
    minus_nodes: np.ndarray  # (nf, 4), padded with -1 for triangles
    plus_nodes: np.ndarray
    minus_cell: np.ndarray  # (nf,)
    plus_cell: np.ndarray
    minus_local_face: np.ndarray
    plus_local_face: np.ndarray
    frames: np.ndarray  # (nf, 3, 3); rows n_f, m_1, m_2
    area: np.ndarray
    tag: np.ndarray

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @classmethod
    def empty(cls) -> "FaultFaces":
        ints = np.zeros(0, dtype=np.int64)
        return cls(
            minus_nodes=np.zeros((0, MAX_FACE_NODES), dtype=np.int64),
            plus_nodes=np.zeros((0, MAX_FACE_NODES), dtype=np.int64),
            minus_cell=ints,
            plus_cell=ints,
            minus_local_face=ints,
            plus_local_face=ints,
            frames=np.zeros((0, 3, 3)),
            area=np.zeros(0),
            tag=ints,
        )

    def __len__(self) -> int:
        return len(self.area)

    @property
    def n_vertices(self) -> np.ndarray:
        return np.count_nonzero(self.minus_nodes >= 0, axis=1)

    def kind(self, face: int) -> FaceKind:
        return FaceKind.for_size(int(self.n_vertices[face]))

    def side_nodes(self, face: int, plus: bool) -> np.ndarray:
        row = (self.plus_nodes if plus else self.minus_nodes)[face]
        return row[row >= 0]

    @property
    def normal(self) -> np.ndarray:
        return self.frames[:, 0, :]

    def concatenate(self, other: "FaultFaces") -> "FaultFaces":
        return FaultFaces(
            **{
                name: np.concatenate([getattr(self, name), getattr(other, name)])
                for name in self.__dataclass_fields__
            }
        )

    def with_nodes(self, minus_nodes: np.ndarray, plus_nodes: np.ndarray) -> "FaultFaces":
        return replace(self, minus_nodes=minus_nodes, plus_nodes=plus_nodes)


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray  # (n, 3)
    cell_nodes: np.ndarray  # (nc, 8), padded with -1
    cell_kind: np.ndarray  # (nc,), ElementKind codes
    cell_region: np.ndarray  # (nc,)
    faults: FaultFaces = field(default_factory=FaultFaces.empty)
    node_sets: Dict[str, np.ndarray] = field(default_factory=dict)
    face_sets: Dict[str, np.ndarray] = field(default_factory=dict)  # name -> (k, 2) (cell, local face)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(np.asarray(self.nodes, dtype=float)))
        conn = np.asarray(self.cell_nodes, dtype=np.int64).reshape(len(self.cell_kind), -1)
        if conn.shape[1] < MAX_CELL_NODES:
            pad = np.full((conn.shape[0], MAX_CELL_NODES - conn.shape[1]), -1, dtype=np.int64)
            conn = np.hstack([conn, pad])
        object.__setattr__(self, "cell_nodes", _readonly(conn))
        object.__setattr__(self, "cell_kind", _readonly(np.asarray(self.cell_kind, dtype=np.int64)))
        object.__setattr__(self, "cell_region", _readonly(np.asarray(self.cell_region, dtype=np.int64)))
        object.__setattr__(
            self, "node_sets", {k: _readonly(np.asarray(v, dtype=np.int64)) for k, v in self.node_sets.items()}
        )
        object.__setattr__(
            self,
            "face_sets",
            {k: _readonly(np.asarray(v, dtype=np.int64).reshape(-1, 2)) for k, v in self.face_sets.items()},
        )

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_cells(self) -> int:
        return len(self.cell_kind)

    @property
    def n_faces(self) -> int:
        return len(self.faults)

    @property
    def n_dofs(self) -> int:
        return 3 * self.n_nodes

    @property
    def diameter(self) -> float:
        if self.n_nodes == 0:
            return 0.0
        return float(np.linalg.norm(self.nodes.max(axis=0) - self.nodes.min(axis=0)))

    def kind_of(self, cell: int) -> ElementKind:
        return ElementKind.from_code(self.cell_kind[cell])

    def cell_node_list(self, cell: int) -> np.ndarray:
        row = self.cell_nodes[cell]
        return row[row >= 0]

    def kinds_present(self) -> List[ElementKind]:
        return [ElementKind.from_code(c) for c in np.unique(self.cell_kind)]

    def cells_of_kind(self, kind: ElementKind) -> np.ndarray:
        return np.flatnonzero(self.cell_kind == ElementKind.parse(kind).code)

    def iter_kind_groups(self) -> Iterator[Tuple[ElementKind, np.ndarray, np.ndarray]]:
        """Yield (kind, cell ids, connectivity) for each element kind present."""
        for kind in self.kinds_present():
            cells = self.cells_of_kind(kind)
            yield kind, cells, self.cell_nodes[cells, : kind.n_nodes]

    def cell_face_nodes(self, cell: int, local_face: int) -> np.ndarray:
        kind = self.kind_of(cell)
        return self.cell_nodes[cell, list(FACE_NODES[kind][local_face])]

    def cell_centroids(self) -> np.ndarray:
        out = np.zeros((self.n_cells, 3))
        for kind, cells, conn in self.iter_kind_groups():
            out[cells] = self.nodes[conn].mean(axis=1)
        return out

    def face_centroids(self) -> np.ndarray:
        nv = self.faults.n_vertices
        pts = self.nodes[np.where(self.faults.minus_nodes >= 0, self.faults.minus_nodes, 0)]
        mask = (self.faults.minus_nodes >= 0)[..., None]
        return (pts * mask).sum(axis=1) / nv[:, None]

    def with_sets(self, node_sets=None, face_sets=None) -> "Mesh":
        return replace(
            self,
            node_sets={**self.node_sets, **(node_sets or {})},
            face_sets={**self.face_sets, **(face_sets or {})},
        )
