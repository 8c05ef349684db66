"""Quotient geometry of the Grassmannian Gr(p, n) via orthonormal
representatives.

Horizontal tangents at a basepoint o are n x p matrices W with o.T W = 0.
The closed-form horizontal geodesic uses the thin SVD W = U Theta V.T:

    exp_o(W) = o V cos(Theta) V.T + U sin(Theta) V.T
    log_o(x) = U Theta V.T,  U Sigma V.T = x (o.T x)^{-1} - o,  Theta = arctan Sigma

The subspace distance is the 2-norm of the principal-angle vector,
arccos of the singular values of x.T y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit
from .errors import CutLocus, InvalidMatrix
from .stiefel import StiefelPoint

_HORIZ_TOL = 1e-10
_CUTLOCUS_RCOND = 1e-12


@dataclass(frozen=True)
class HorizontalTangent:
    """Horizontal direction at a Stiefel point (o.T @ matrix = 0)."""

    basepoint: StiefelPoint
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != self.basepoint.matrix.shape:
            raise InvalidMatrix(
                f"tangent shape {m.shape} != point shape {self.basepoint.matrix.shape}"
            )
        drift = np.abs(self.basepoint.matrix.T @ m).max() if m.size else 0.0
        if drift > _HORIZ_TOL:
            raise InvalidMatrix(f"tangent is not horizontal (o^T w max {drift:.2e})")
        object.__setattr__(self, "matrix", m)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def angles(self) -> np.ndarray:
        """Singular values of the tangent matrix, i.e. the geodesic's
        principal angles, descending."""
        return np.linalg.svd(self.matrix, compute_uv=False)


@dataclass(frozen=True)
class PrincipalAngles:
    """Principal angles between two p-dim subspaces, descending in [0, pi/2]."""

    angles: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.angles))


def principal_angles(x: StiefelPoint, y: StiefelPoint) -> PrincipalAngles:
    """Principal angles arccos(sigma_i(x.T y)), clipped against roundoff."""
    s = np.linalg.svd(x.matrix.T @ y.matrix, compute_uv=False)
    return PrincipalAngles(np.sort(np.arccos(np.clip(s, -1.0, 1.0)))[::-1])


def principal_angle_distance(x: StiefelPoint, y: StiefelPoint) -> float:
    """Subspace distance sqrt(sum_i theta_i^2); invariant under left
    multiplication by orthogonal matrices and under basis changes."""
    return principal_angles(x, y).norm()


def horiz_log(o: StiefelPoint, x: StiefelPoint) -> HorizontalTangent:
    """Horizontal log of x at o: W = U arctan(Sigma) V.T with
    U Sigma V.T = x (o.T x)^{-1} - o."""
    otx = o.matrix.T @ x.matrix
    s = np.linalg.svd(otx, compute_uv=False)
    if s[0] == 0.0 or s[-1] / s[0] < _CUTLOCUS_RCOND:
        raise CutLocus("subspaces contain orthogonal directions (o^T x singular)")
    g = np.linalg.solve(otx.T, x.matrix.T).T - o.matrix
    u, sig, v = matkit.thin_svd(g)
    w = (u * np.arctan(sig)) @ v.T
    # project out roundoff in the vertical direction
    w = w - o.matrix @ (o.matrix.T @ w)
    return HorizontalTangent(o, w)


def horiz_exp(o: StiefelPoint, w: HorizontalTangent) -> StiefelPoint:
    """Closed-form horizontal geodesic endpoint at t = 1."""
    if w.basepoint is not o and not np.array_equal(w.basepoint.matrix, o.matrix):
        raise InvalidMatrix("tangent is anchored at a different basepoint")
    u, theta, v = matkit.thin_svd(w.matrix)
    m = o.matrix @ (v * np.cos(theta)) @ v.T + (u * np.sin(theta)) @ v.T
    return StiefelPoint(m)
