"""Containers passed between assembly, condensation and the nonlinear drivers."""

from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from faultcontact.core.mesh_models import Mesh


class ContactState(IntEnum):
    STICK = 0
    SLIP = 1
    OPEN = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def labels(cls, codes) -> List[str]:
        return [cls(int(c)).label for c in codes]


@dataclass(frozen=True)
class FaceContactState:
    """Per-face multipliers and kinematics; tractions are (t_N, t_1, t_2) in the face frame."""

    traction: np.ndarray  # (nf, 3)
    g_N: np.ndarray  # (nf,)
    dg_T: np.ndarray  # (nf, 2) tangential jump increment over the current step
    state: np.ndarray  # (nf,) ContactState codes
    g_T_prev: np.ndarray  # (nf, 2) tangential jump at the end of the previous step

    @classmethod
    def initial(cls, n_faces: int) -> "FaceContactState":
        return cls(
            traction=np.zeros((n_faces, 3)),
            g_N=np.zeros(n_faces),
            dg_T=np.zeros((n_faces, 2)),
            state=np.full(n_faces, ContactState.STICK, dtype=np.int64),
            g_T_prev=np.zeros((n_faces, 2)),
        )

    def __len__(self) -> int:
        return len(self.g_N)

    @property
    def t_N(self) -> np.ndarray:
        return self.traction[:, 0]

    @property
    def t_T(self) -> np.ndarray:
        return self.traction[:, 1:]

    def counts(self) -> Dict[str, int]:
        return {s.label: int(np.count_nonzero(self.state == s)) for s in ContactState}

    def with_(self, **changes) -> "FaceContactState":
        return replace(self, **changes)


@dataclass(frozen=True)
class TractionUpdate:
    t_hat: np.ndarray  # (nf, 3) augmented tractions in the face frame
    state: np.ndarray  # (nf,)
    tau_max: np.ndarray  # (nf,)
    tangent: Optional[np.ndarray] = None  # (nf, 3, 3) d t_hat / d (g_N, dg_1, dg_2)


@dataclass(frozen=True)
class JumpOperators:
    """Average-jump map: rows 3f..3f+2 of ``G`` give (g_N, g_1, g_2) of face f from the full dof vector."""

    G: sp.csr_matrix  # (3 nf, n_u + n_b)
    area: np.ndarray
    frames: np.ndarray
    n_u: int

    @property
    def G_u(self) -> sp.csr_matrix:
        return self.G[:, : self.n_u]

    @property
    def G_b(self) -> sp.csr_matrix:
        return self.G[:, self.n_u :]

    def averages(self, x: np.ndarray) -> np.ndarray:
        return (self.G @ x).reshape(-1, 3)


@dataclass(frozen=True)
class DiscreteSystem:
    """Everything about a problem that does not change between Newton iterations."""

    mesh: Mesh
    n_u: int
    n_b: int
    K: sp.csr_matrix  # bulk stiffness over [u; u_b]
    eigen_operator: sp.csr_matrix  # (n_u + n_b, 6 n_cells); times per-cell Voigt stress
    jumps: JumpOperators
    eps_N: np.ndarray
    eps_T: np.ndarray
    clusters: List[np.ndarray]  # face ids condensed together
    structure: sp.coo_matrix  # explicit zeros completing the u-u pattern
    bubble_cell: np.ndarray  # (n_bubbles,) parent cell of each bubble
    reference_modulus: float
    reference_size: float

    @property
    def n_dofs(self) -> int:
        return self.n_u + self.n_b

    @property
    def n_faces(self) -> int:
        return self.mesh.n_faces


@dataclass(frozen=True)
class StepLoads:
    """Load-step data resolved onto dofs."""

    dirichlet_dofs: np.ndarray
    dirichlet_values: np.ndarray
    external: np.ndarray  # (n_u,) Neumann force vector
    eigen: np.ndarray  # (n_u + n_b,) eigenstress residual
    fault_pressure: np.ndarray  # (n_u + n_b,) pressurized-fracture residual
    label: float = 0.0

    def free_dofs(self, n_u: int) -> np.ndarray:
        mask = np.ones(n_u, dtype=bool)
        mask[self.dirichlet_dofs] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True)
class SystemBlocks:
    r_u: np.ndarray
    r_b: np.ndarray
    A_uu: sp.csr_matrix
    A_ub: sp.csr_matrix
    A_bu: sp.csr_matrix
    A_bb: sp.csr_matrix
    update: TractionUpdate


@dataclass(frozen=True)
class BlockFactor:
    faces: np.ndarray
    bubble_dofs: np.ndarray
    node_dofs: np.ndarray
    lu: Tuple[np.ndarray, np.ndarray]
    A_bu: np.ndarray  # (len(bubble_dofs), len(node_dofs))


@dataclass(frozen=True)
class CondensedSystem:
    A_hat: sp.csr_matrix
    r_hat: np.ndarray
    factors: List[BlockFactor] = field(default_factory=list)
