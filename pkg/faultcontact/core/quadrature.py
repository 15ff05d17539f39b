"""Quadrature rules on the reference cells and faces."""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from faultcontact.core.elements import ElementKind


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def size(self) -> int:
        return len(self.weights)


def _gauss01(n: int):
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _line(n: int):
    return leggauss(n)


def _hex(n: int) -> QuadratureRule:
    x, w = _line(n)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    W = np.einsum("i,j,k->ijk", w, w, w)
    pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    return QuadratureRule(pts, W.ravel(), 2 * n - 1)


def _quad(n: int) -> QuadratureRule:
    x, w = _line(n)
    S, T = np.meshgrid(x, x, indexing="ij")
    return QuadratureRule(np.column_stack([S.ravel(), T.ravel()]), np.outer(w, w).ravel(), 2 * n - 1)


def _tri3() -> QuadratureRule:
    pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
    return QuadratureRule(pts, np.full(3, 1 / 6), 2)


def _tri4() -> QuadratureRule:
    pts = np.array([[1 / 3, 1 / 3], [0.2, 0.2], [0.6, 0.2], [0.2, 0.6]])
    w = np.array([-27.0, 25.0, 25.0, 25.0]) / 96.0
    return QuadratureRule(pts, w, 3)


def _tri7() -> QuadratureRule:
    r15 = math.sqrt(15.0)
    a = (6.0 + r15) / 21.0
    b = (6.0 - r15) / 21.0
    wa = (155.0 + r15) / 2400.0
    wb = (155.0 - r15) / 2400.0
    pts = np.array(
        [
            [1 / 3, 1 / 3],
            [a, a], [1 - 2 * a, a], [a, 1 - 2 * a],
            [b, b], [1 - 2 * b, b], [b, 1 - 2 * b],
        ]
    )
    w = np.array([9.0 / 80.0, wa, wa, wa, wb, wb, wb])
    return QuadratureRule(pts, w, 5)


def _tet4() -> QuadratureRule:
    a = 0.5854101966249685
    b = 0.1381966011250105
    pts = np.array([[b, b, b], [a, b, b], [b, a, b], [b, b, a]])
    return QuadratureRule(pts, np.full(4, 1.0 / 24.0), 2)


def _tet14() -> QuadratureRule:
    a1 = 0.31088591926330060980
    a2 = 0.092735250310891226402
    b = 0.045503704125649649492
    pts = []
    for a in (a1, a2):
        c = 1.0 - 3.0 * a
        pts += [[a, a, a], [c, a, a], [a, c, a], [a, a, c]]
    c = 0.5 - b
    pts += [[b, b, c], [b, c, b], [c, b, b], [b, c, c], [c, b, c], [c, c, b]]
    w = np.concatenate(
        [
            np.full(4, 0.018781320953002641800),
            np.full(4, 0.012248840519393658257),
            np.full(6, 0.0070910034628469110730),
        ]
    )
    return QuadratureRule(np.array(pts), w, 5)


def _prism(tri: QuadratureRule, n_line: int) -> QuadratureRule:
    z, wz = _line(n_line)
    pts = np.array([[p[0], p[1], zz] for p in tri.points for zz in z])
    w = np.array([wt * wl for wt in tri.weights for wl in wz])
    return QuadratureRule(pts, w, min(tri.degree, 2 * n_line - 1))


def _collapsed_tri(n: int) -> QuadratureRule:
    u, wu = _gauss01(n)
    pts, w = [], []
    for i in range(n):
        for j in range(n):
            pts.append([u[i], u[j] * (1 - u[i])])
            w.append(wu[i] * wu[j] * (1 - u[i]))
    return QuadratureRule(np.array(pts), np.array(w), 2 * n - 2)


def _collapsed_tet(n: int) -> QuadratureRule:
    u, wu = _gauss01(n)
    pts, w = [], []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                x = u[i]
                y = u[j] * (1 - x)
                z = u[k] * (1 - x) * (1 - u[j])
                pts.append([x, y, z])
                w.append(wu[i] * wu[j] * wu[k] * (1 - x) ** 2 * (1 - u[j]))
    return QuadratureRule(np.array(pts), np.array(w), 2 * n - 3)


@lru_cache(maxsize=None)
def standard_quadrature(kind) -> QuadratureRule:
    """Rule integrating the linear stiffness integrand exactly on affine cells."""
    kind = ElementKind.parse(kind)
    if kind is ElementKind.HEX8:
        return _hex(2)
    if kind is ElementKind.TET4:
        return _tet4()
    return _prism(_tri3(), 2)


@lru_cache(maxsize=None)
def bubble_quadrature(kind) -> QuadratureRule:
    """Rule for cells carrying face bubbles (bubble-times-linear integrands)."""
    kind = ElementKind.parse(kind)
    if kind is ElementKind.HEX8:
        return _hex(3)
    if kind is ElementKind.TET4:
        return _tet14()
    return _prism(_tri7(), 3)


@lru_cache(maxsize=None)
def refined_quadrature(kind, order: int = 8) -> QuadratureRule:
    """High-order oracle rule, distinct from the production rules."""
    kind = ElementKind.parse(kind)
    if kind is ElementKind.HEX8:
        return _hex(order)
    if kind is ElementKind.TET4:
        return _collapsed_tet(order)
    return _prism(_collapsed_tri(order), order)


@lru_cache(maxsize=None)
def face_quadrature(n_face_nodes: int, bubble: bool = False) -> QuadratureRule:
    """Rule on the face parameter domain ([-1,1]^2 for quads, unit triangle otherwise)."""
    if n_face_nodes == 4:
        return _quad(3 if bubble else 2)
    return _tri4() if bubble else _tri3()


@lru_cache(maxsize=None)
def refined_face_quadrature(n_face_nodes: int, order: int = 8) -> QuadratureRule:
    if n_face_nodes == 4:
        return _quad(order)
    return _collapsed_tri(order)
