"""Augmented-Lagrangian traction algebra on fault faces.

All tractions and jumps are expressed in the face frame (n_f, m_1, m_2);
the jump of a field is plus trace minus minus trace, so g_N > 0 is opening.
"""

import logging
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp

from faultcontact.core import settings
from faultcontact.core.errors import InconsistentStateError
from faultcontact.core.mesh_models import Mesh
from faultcontact.core.quadrature import face_quadrature
from faultcontact.core.system_models import ContactState, FaceContactState, JumpOperators, TractionUpdate
from faultcontact.models.problem_models import FrictionParams
from faultcontact.services.fem_service import face_integration

logger = logging.getLogger(__name__)


class TangentOperators(NamedTuple):
    """Derivatives of the augmented tractions in face-frame components."""

    dtN_dgN: float
    dtT_dgN: np.ndarray  # (2,)
    dtT_dgT: np.ndarray  # (2, 2)

    def local_matrix(self) -> np.ndarray:
        D = np.zeros((3, 3))
        D[0, 0] = self.dtN_dgN
        D[1:, 0] = self.dtT_dgN
        D[1:, 1:] = self.dtT_dgT
        return D

    def global_operators(self, frame: np.ndarray):
        """The three 3x3 operators in global components for a frame with rows (n, m1, m2)."""
        n, T = frame[0], frame[1:]
        return (
            self.dtN_dgN * np.outer(n, n),
            np.outer(T.T @ self.dtT_dgN, n),
            T.T @ self.dtT_dgT @ T,
        )


class KKTReport(NamedTuple):
    normal_sign: np.ndarray
    gap: np.ndarray
    complementarity: np.ndarray
    coulomb: np.ndarray
    collinearity: np.ndarray

    @property
    def passed(self) -> np.ndarray:
        return self.normal_sign & self.gap & self.complementarity & self.coulomb & self.collinearity

    @property
    def all_passed(self) -> bool:
        return bool(np.all(self.passed))


# ---------------------------------------------------------------------------
# Scalar algebra
# ---------------------------------------------------------------------------


def negative_part(x):
    return np.minimum(x, 0.0)


def ball_projection(t, rho):
    """Project 2-vectors ``t`` (..., 2) onto the closed ball of radius ``rho``."""
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    norm = np.linalg.norm(t, axis=-1)
    scale = np.ones_like(norm)
    outside = norm > rho
    scale = np.where(outside, rho / np.where(outside, norm, 1.0), scale)
    return t * scale[..., None]


def tau_max(t_N, friction: FrictionParams):
    return friction.cohesion - friction.tan_phi * np.asarray(t_N, dtype=float)


def update_normal(t_N_old, g_N, eps_N):
    return negative_part(np.asarray(t_N_old) + np.asarray(eps_N) * np.asarray(g_N))


def update_tangential(t_T_old, dg_T, eps_T, t_N_for_limit, friction: FrictionParams):
    trial = np.asarray(t_T_old, dtype=float) + np.asarray(eps_T)[..., None] * np.asarray(dg_T, dtype=float)
    return ball_projection(trial, tau_max(t_N_for_limit, friction))


def classify_state(sigma_N, trial_T, tau, eps_T):
    """Open if sigma_N = t_N + eps_N g_N > 0, else stick inside the Coulomb ball, else slip."""
    sigma_N = np.asarray(sigma_N, dtype=float)
    norm = np.linalg.norm(np.asarray(trial_T, dtype=float), axis=-1)
    stick = (norm <= tau) | (norm <= settings.ZERO_SLIP_FACTOR * np.asarray(eps_T))
    state = np.where(stick, ContactState.STICK, ContactState.SLIP)
    return np.where(sigma_N > 0, ContactState.OPEN, state).astype(np.int64)


def tangent_derivatives(state, trial_T, tau, eps_N, eps_T, friction: FrictionParams, symmetric: bool = False) -> TangentOperators:
    state = ContactState(int(state))
    zero2 = np.zeros(2)
    if state is ContactState.OPEN:
        return TangentOperators(0.0, zero2, np.zeros((2, 2)))
    if state is ContactState.STICK:
        return TangentOperators(float(eps_N), zero2, float(eps_T) * np.eye(2))
    t = np.asarray(trial_T, dtype=float)
    norm = float(np.linalg.norm(t))
    if norm == 0.0:
        raise InconsistentStateError("slip state with zero trial tangential traction")
    dT = float(eps_T) * float(tau) * (norm**2 * np.eye(2) - np.outer(t, t)) / norm**3
    dN = zero2 if symmetric else -float(eps_N) * friction.tan_phi * t / norm
    return TangentOperators(float(eps_N), dN, dT)


# ---------------------------------------------------------------------------
# Vectorized return mapping
# ---------------------------------------------------------------------------


def evaluate_tractions(
    traction: np.ndarray,
    g: np.ndarray,
    g_T_prev: np.ndarray,
    eps_N: np.ndarray,
    eps_T: np.ndarray,
    friction: FrictionParams,
    symmetric: bool = False,
    tangent: bool = True,
) -> TractionUpdate:
    """Augmented tractions for current multipliers ``traction`` and average jumps ``g``.

    With ``symmetric`` the Coulomb limit uses the multiplier t_N instead of
    the fresh normal traction, and the tangential traction no longer depends
    on g_N.
    """
    nf = len(traction)
    sigma_N = traction[:, 0] + eps_N * g[:, 0]
    t_N = negative_part(sigma_N)
    trial = traction[:, 1:] + eps_T[:, None] * (g[:, 1:] - g_T_prev)
    limit = tau_max(traction[:, 0] if symmetric else t_N, friction)
    state = classify_state(sigma_N, trial, limit, eps_T)
    t_T = ball_projection(trial, limit)
    t_hat = np.column_stack([t_N, t_T])
    open_ = state == ContactState.OPEN
    t_hat[open_] = 0.0
    stick = state == ContactState.STICK
    t_hat[stick, 1:] = trial[stick]

    D = None
    if tangent:
        D = np.zeros((nf, 3, 3))
        closed = ~open_
        D[closed, 0, 0] = eps_N[closed]
        D[stick, 1, 1] = eps_T[stick]
        D[stick, 2, 2] = eps_T[stick]
        slip = np.flatnonzero(state == ContactState.SLIP)
        if slip.size:
            t = trial[slip]
            norm = np.linalg.norm(t, axis=1)
            outer = np.einsum("fi,fj->fij", t, t)
            eye = np.broadcast_to(np.eye(2), outer.shape)
            D[slip, 1:, 1:] = (eps_T[slip] * limit[slip] / norm**3)[:, None, None] * (norm[:, None, None] ** 2 * eye - outer)
            if not symmetric:
                D[slip, 1:, 0] = -(eps_N[slip] * friction.tan_phi / norm)[:, None] * t
    return TractionUpdate(t_hat=t_hat, state=state, tau_max=limit, tangent=D)


def contact_state_from(update: TractionUpdate, g: np.ndarray, previous: FaceContactState) -> FaceContactState:
    return previous.with_(
        traction=update.t_hat,
        g_N=g[:, 0].copy(),
        dg_T=g[:, 1:] - previous.g_T_prev,
        state=update.state,
    )


def relative_traction_change(new: np.ndarray, old: np.ndarray, floor: float) -> float:
    if len(new) == 0:
        return 0.0
    delta = float(np.max(np.linalg.norm(new - old, axis=1)))
    scale = max(float(np.max(np.linalg.norm(new, axis=1))), floor)
    return delta / scale


# ---------------------------------------------------------------------------
# Jumps
# ---------------------------------------------------------------------------


def normal_projection(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return np.outer(n, n)


def tangential_projection(n) -> np.ndarray:
    return np.eye(3) - normal_projection(n)


def face_node_weights(mesh: Mesh, face: int) -> np.ndarray:
    """Integrals of the face shape functions over face ``face``."""
    nodes = mesh.faults.side_nodes(face, False)
    N, dA, _ = face_integration(mesh.nodes[nodes], face_quadrature(len(nodes)))
    return N.T @ dA


def face_average_jumps(mesh: Mesh, face: int, u: np.ndarray, u_prev: Optional[np.ndarray] = None):
    """(g_N, dg_T) of one face from nodal displacements, ignoring bubble dofs."""
    faults = mesh.faults
    w = face_node_weights(mesh, face) / faults.area[face]
    U = np.asarray(u, dtype=float).reshape(-1, 3)
    minus, plus = faults.side_nodes(face, False), faults.side_nodes(face, True)
    jump = w @ (U[plus] - U[minus])
    frame = faults.frames[face]
    g_T = frame[1:] @ jump
    if u_prev is not None:
        P = np.asarray(u_prev, dtype=float).reshape(-1, 3)
        g_T = g_T - frame[1:] @ (w @ (P[plus] - P[minus]))
    return float(frame[0] @ jump), g_T


def build_jump_operators(mesh: Mesh, bubble_traces: Optional[np.ndarray] = None) -> JumpOperators:
    """Assemble the average-jump map.

    ``bubble_traces`` is (nf, 2) with the face integrals of the minus and plus
    bubbles, or None for an unenriched discretization.
    """
    faults = mesh.faults
    nf = len(faults)
    n_u = mesh.n_dofs
    n_b = 0 if bubble_traces is None else 6 * nf
    rows, cols, vals = [], [], []
    for f in range(nf):
        R = faults.frames[f] / faults.area[f]
        w = face_node_weights(mesh, f)
        for sign, nodes in ((-1.0, faults.side_nodes(f, False)), (1.0, faults.side_nodes(f, True))):
            for a, node in enumerate(nodes):
                for c in range(3):
                    rows.append(3 * f + np.arange(3))
                    cols.append(np.full(3, 3 * node + c))
                    vals.append(sign * w[a] * R[:, c])
        if bubble_traces is not None:
            for side, sign in ((0, -1.0), (1, 1.0)):
                beta = 2 * f + side
                for c in range(3):
                    rows.append(3 * f + np.arange(3))
                    cols.append(np.full(3, n_u + 3 * beta + c))
                    vals.append(sign * bubble_traces[f, side] * R[:, c])
    if rows:
        G = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(3 * nf, n_u + n_b)
        ).tocsr()
    else:
        G = sp.csr_matrix((0, n_u + n_b))
    return JumpOperators(G=G, area=np.array(faults.area), frames=np.array(faults.frames), n_u=n_u)


def interface_residual(ops: JumpOperators, t_hat: np.ndarray) -> np.ndarray:
    """Integral of the jump of the test function against the traction vector."""
    return ops.G.T @ (ops.area[:, None] * t_hat).ravel()


def interface_tangent(ops: JumpOperators, D: np.ndarray) -> sp.csr_matrix:
    nf = len(ops.area)
    if nf == 0:
        return sp.csr_matrix((ops.G.shape[1], ops.G.shape[1]))
    W = sp.block_diag([ops.area[f] * D[f] for f in range(nf)], format="csr")
    return (ops.G.T @ W @ ops.G).tocsr()


def fault_pressure_residual(ops: JumpOperators, tags: np.ndarray, pressures) -> np.ndarray:
    """-p times the integral of the normal jump of the test function, per fault tag."""
    p = np.zeros(len(ops.area))
    for tag, value in pressures.items():
        p[tags == int(tag)] = value
    load = np.zeros((len(ops.area), 3))
    load[:, 0] = -p
    return interface_residual(ops, load)


# ---------------------------------------------------------------------------
# KKT checks
# ---------------------------------------------------------------------------


def check_kkt(
    state: FaceContactState,
    friction: FrictionParams,
    eps_N: np.ndarray,
    rtol: float = settings.KKT_RTOL,
    traction_scale: Optional[float] = None,
) -> KKTReport:
    """Per-face normal-contact, Coulomb and slip-collinearity conditions at convergence."""
    t = state.traction
    if traction_scale is None:
        traction_scale = float(np.max(np.linalg.norm(t, axis=1))) if len(t) else 0.0
    tol_t = rtol * max(traction_scale, np.finfo(float).tiny)
    tol_g = tol_t / eps_N
    t_N, t_T = t[:, 0], t[:, 1:]
    normal_sign = t_N <= tol_t
    gap = state.g_N >= -tol_g
    complementarity = np.abs(t_N * state.g_N) <= traction_scale * tol_g
    coulomb = np.linalg.norm(t_T, axis=1) <= tau_max(t_N, friction) + tol_t
    slip = state.state == ContactState.SLIP
    dg_T = state.dg_T
    slip_norm = np.linalg.norm(dg_T, axis=1)
    along = np.einsum("fi,fi->f", t_T, dg_T)
    across = t_T[:, 0] * dg_T[:, 1] - t_T[:, 1] * dg_T[:, 0]
    collinearity = ~slip | ((along >= -tol_t * slip_norm) & (np.abs(across) <= tol_t * slip_norm))
    report = KKTReport(normal_sign, gap, complementarity, coulomb, collinearity)
    failed = np.flatnonzero(~report.passed)
    if failed.size:
        logger.warning("KKT checks failed on %d of %d fault face(s)", failed.size, len(t))
    return report
