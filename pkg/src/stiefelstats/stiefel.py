"""Geometry of the compact Stiefel manifold St(p, n).

Points are n x p matrices with orthonormal columns. Tangent directions are
carried as n x n skew-symmetric matrices in the block form

    W = [[C, -B.T],
         [B,  0  ]]

with C a p x p skew block and B an (n-p) x p block. The retraction is
Exp_X(W) = Cay(W) X with Cay(W) = (I + W)(I - W)^{-1}; its inverse (the
lifting map) has the closed-form blocks

    C = 2 (X_u + Y_u)^{-T} sk(Y_u^T X_u + X_l^T Y_l) (X_u + Y_u)^{-1}
    B = (Y_l - X_l)(X_u + Y_u)^{-1}

defined whenever X_u + Y_u is nonsingular. Geodesics and distances are the
chart images of straight lines: Gamma_X^Y(t) = Exp_X(t Exp_X^{-1}(Y)) and
d(X, Y) = ||Exp_X^{-1}(Y)||.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matkit
from .errors import InvalidMatrix, OutOfNeighborhood

# Radius of the regular geodesic ball guaranteeing a unique Frechet mean
# (max sectional curvature of the horizontal distribution is 2).
REGULAR_BALL_RADIUS = np.pi / (2.0 * np.sqrt(2.0))

# Reciprocal-condition threshold on X_u + Y_u for the lifting map.
NEIGHBORHOOD_RCOND = 1e-8

_ORTHO_ACCEPT = 1e-10  # drift accepted as-is
_ORTHO_REPAIR = 1e-6  # drift re-orthonormalized; beyond this: rejected


class StiefelPoint:
    """A point on St(p, n): an n x p matrix with orthonormal columns.

    Construction validates orthonormality; drift in (1e-10, 1e-6] is
    silently repaired by QR, larger drift is rejected. The stored array
    is read-only.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix: np.ndarray):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < m.shape[1] or m.shape[1] < 1:
            raise InvalidMatrix(f"expected n x p with n >= p >= 1, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidMatrix("non-finite entries")
        drift = np.linalg.norm(m.T @ m - np.eye(m.shape[1]))
        if drift > _ORTHO_REPAIR:
            raise InvalidMatrix(f"columns not orthonormal (drift {drift:.2e})")
        if drift > _ORTHO_ACCEPT:
            m = matkit.orthonormalize(m)
        m.flags.writeable = False
        self.matrix = m

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    def __repr__(self) -> str:
        return f"StiefelPoint(n={self.n}, p={self.p})"


def origin(n: int, p: int) -> StiefelPoint:
    """The origin O = [I_p; 0] of the chart."""
    m = np.zeros((n, p))
    m[:p, :p] = np.eye(p)
    return StiefelPoint(m)


def manifold_dim(n: int, p: int) -> int:
    """dim St(p, n) = np - p(p+1)/2."""
    return n * p - p * (p + 1) // 2


@dataclass(frozen=True)
class SkewLift:
    """Tangent carrier: the (C, B) blocks of an n x n skew matrix."""

    c: np.ndarray  # p x p, skew
    b: np.ndarray  # (n-p) x p

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if c.shape[0] != c.shape[1] or b.shape[1] != c.shape[0]:
            raise InvalidMatrix(f"inconsistent blocks: c {c.shape}, b {b.shape}")
        object.__setattr__(self, "c", 0.5 * (c - c.T))  # enforce exact skewness
        object.__setattr__(self, "b", b)

    @property
    def p(self) -> int:
        return self.c.shape[0]

    @property
    def n(self) -> int:
        return self.c.shape[0] + self.b.shape[0]

    @property
    def free_dim(self) -> int:
        p, n = self.p, self.n
        return p * (p - 1) // 2 + (n - p) * p

    def full(self) -> np.ndarray:
        """Assemble the n x n skew matrix [[C, -B.T], [B, 0]]."""
        n, p = self.n, self.p
        w = np.zeros((n, n))
        w[:p, :p] = self.c
        w[:p, p:] = -self.b.T
        w[p:, :p] = self.b
        return w

    def scaled(self, t: float) -> "SkewLift":
        return SkewLift(t * self.c, t * self.b)

    def norm(self) -> float:
        """Frobenius norm of the full n x n lift."""
        return float(np.sqrt(np.sum(self.c**2) + 2.0 * np.sum(self.b**2)))

    @staticmethod
    def zero(n: int, p: int) -> "SkewLift":
        return SkewLift(np.zeros((p, p)), np.zeros((n - p, p)))


def inner(u: SkewLift, v: SkewLift) -> float:
    """Canonical metric <U, V> = trace(U.T V) on the full n x n lifts."""
    if u.n != v.n or u.p != v.p:
        raise InvalidMatrix("shape mismatch between tangent vectors")
    return float(np.sum(u.c * v.c) + 2.0 * np.sum(u.b * v.b))


def _split(x: StiefelPoint) -> tuple[np.ndarray, np.ndarray]:
    p = x.p
    return x.matrix[:p, :], x.matrix[p:, :]


def _corner_rcond(x: StiefelPoint, y: StiefelPoint) -> float:
    s = np.linalg.svd(x.matrix[: x.p, :] + y.matrix[: y.p, :], compute_uv=False)
    return 0.0 if s[0] == 0.0 else float(s[-1] / s[0])


def lift(x: StiefelPoint, y: StiefelPoint) -> SkewLift:
    """Lifting map Exp_X^{-1}(Y); requires X_u + Y_u nonsingular."""
    if (x.n, x.p) != (y.n, y.p):
        raise InvalidMatrix("points live on different manifolds")
    xu, xl = _split(x)
    yu, yl = _split(y)
    su = xu + yu
    s = np.linalg.svd(su, compute_uv=False)
    if s[0] == 0.0 or s[-1] / s[0] < NEIGHBORHOOD_RCOND:
        raise OutOfNeighborhood(
            f"X_u + Y_u is singular (rcond {0.0 if s[0] == 0 else s[-1] / s[0]:.2e})"
        )
    m = matkit.skew_part(yu.T @ xu + xl.T @ yl)
    c = 2.0 * np.linalg.solve(su.T, np.linalg.solve(su.T, m.T).T)
    b = np.linalg.solve(su.T, (yl - xl).T).T
    return SkewLift(c, b)


def cayley(w: SkewLift) -> np.ndarray:
    """Cayley transform Cay(W) = (I + W)(I - W)^{-1}, a rotation in SO(n)."""
    wf = w.full()
    i = np.eye(w.n)
    return np.linalg.solve((i - wf).T, (i + wf).T).T


def retract(x: StiefelPoint, w: SkewLift) -> StiefelPoint:
    """Retraction Exp_X(W) = Cay(W) X."""
    if w.n != x.n or w.p != x.p:
        raise InvalidMatrix("tangent and point shapes differ")
    wf = w.full()
    z = np.linalg.solve(np.eye(x.n) - wf, x.matrix)
    return StiefelPoint(z + wf @ z)


def geodesic_point(x: StiefelPoint, y: StiefelPoint, t: float) -> StiefelPoint:
    """Gamma_X^Y(t) = Exp_X(t Exp_X^{-1}(Y))."""
    if t == 0.0:
        return x
    return retract(x, lift(x, y).scaled(t))


def distance(x: StiefelPoint, y: StiefelPoint) -> float:
    """d(X, Y) = ||Exp_X^{-1}(Y)|| in the canonical metric."""
    if x is y:
        return 0.0
    return lift(x, y).norm()


def in_neighborhood(x: StiefelPoint, y: StiefelPoint) -> bool:
    """True when the lift exists and Y is inside the regular ball at X."""
    if (x.n, x.p) != (y.n, y.p):
        return False
    if _corner_rcond(x, y) < NEIGHBORHOOD_RCOND:
        return False
    return distance(x, y) < REGULAR_BALL_RADIUS


def random_haar(n: int, p: int, rng: np.random.Generator) -> StiefelPoint:
    """Uniform (Haar) point on St(p, n): sign-fixed QR of a Gaussian matrix."""
    if not (n >= p >= 1):
        raise InvalidMatrix(f"need n >= p >= 1, got ({n}, {p})")
    return StiefelPoint(matkit.orthonormalize(rng.standard_normal((n, p))))


def batch_lifts(x: StiefelPoint, mats: np.ndarray):
    """Lifts Exp_X^{-1}(Y_i) for a stack of points (N, n, p).

    Returns (c, b, rcond) with c (N, p, p), b (N, n-p, p) and the
    reciprocal condition of each X_u + Y_u; entries with rcond below the
    neighborhood threshold hold NaN blocks.
    """
    mats = np.asarray(mats, dtype=float)
    p = x.p
    xu, xl = x.matrix[:p, :], x.matrix[p:, :]
    yu = mats[:, :p, :]
    yl = mats[:, p:, :]
    su = xu[None] + yu
    sv = np.linalg.svd(su, compute_uv=False)
    rcond = np.where(sv[:, 0] > 0, sv[:, -1] / np.maximum(sv[:, 0], 1e-300), 0.0)
    ok = rcond >= NEIGHBORHOOD_RCOND
    n, nn = mats.shape[1], mats.shape[0]
    c = np.full((nn, p, p), np.nan)
    b = np.full((nn, n - p, p), np.nan)
    if np.any(ok):
        sut = np.transpose(su[ok], (0, 2, 1))
        m = yu[ok].transpose(0, 2, 1) @ xu + xl.T @ yl[ok]
        m = 0.5 * (np.transpose(m, (0, 2, 1)) - m)
        inner_ = np.transpose(np.linalg.solve(sut, np.transpose(m, (0, 2, 1))), (0, 2, 1))
        c[ok] = 2.0 * np.linalg.solve(sut, inner_)
        b[ok] = np.transpose(
            np.linalg.solve(sut, np.transpose(yl[ok] - xl[None], (0, 2, 1))), (0, 2, 1)
        )
    return c, b, rcond


@dataclass
class GeodesicSegment:
    """The chart geodesic from start to end, with its lift cached."""

    start: StiefelPoint
    end: StiefelPoint
    lift: SkewLift = field(init=False)

    def __post_init__(self):
        self.lift = lift(self.start, self.end)

    def evaluate(self, t: float) -> StiefelPoint:
        if t == 0.0:
            return self.start
        if t == 1.0:
            return self.end
        return retract(self.start, self.lift.scaled(t))

    def length(self) -> float:
        return self.lift.norm()
