"""Dense-matrix kernels used by the geometry modules.

Matrices are plain ``numpy.ndarray`` objects (float64, 2-D). These wrappers
add the validation and conventions the rest of the library relies on:
finite-entry checks, a conditioning threshold for solves, the skew-part
sign convention, and a sign-deterministic orthonormalization.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidMatrix, RankDeficient, SingularSystem

# Reciprocal-condition threshold below which a solve is rejected.
RCOND_SINGULAR = 1e-12


class ThinSvd(NamedTuple):
    """Thin SVD m = u @ diag(s) @ v.T with s descending and u, v
    column-orthonormal."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _as_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise InvalidMatrix(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    return a


def thin_svd(m: np.ndarray) -> ThinSvd:
    """Thin singular value decomposition of an m x n matrix.

    Returns u (m x k), s (k,) descending, v (n x k) with k = min(m, n).
    """
    a = _as_matrix(m)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return ThinSvd(u, s, vt.T)


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b for square a, rejecting ill-conditioned systems."""
    a = _as_matrix(a, "a")
    b = np.asarray(b, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"a must be square, got {a.shape}")
    if a.shape[0] != b.shape[0]:
        raise InvalidMatrix(f"shape mismatch: a {a.shape}, b {b.shape}")
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0 or s[-1] / s[0] < RCOND_SINGULAR:
        raise SingularSystem(
            f"reciprocal condition {0.0 if s[0] == 0 else s[-1] / s[0]:.2e} "
            f"below {RCOND_SINGULAR:.0e}"
        )
    return np.linalg.solve(a, b)


def skew_part(m: np.ndarray) -> np.ndarray:
    """Skew part sk(m) = (m.T - m) / 2.

    The sign matches the convention used by the lifting map; with it the
    retraction/lifting roundtrip is exact (see stiefel module tests).
    """
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"matrix must be square, got {a.shape}")
    return 0.5 * (a.T - a)


def orthonormalize(m: np.ndarray) -> np.ndarray:
    """Project a full-column-rank n x p matrix onto St(p, n).

    Thin QR with the sign convention diag(R) > 0, so the result is a
    deterministic function of the column span and the column order.
    """
    a = _as_matrix(m)
    n, p = a.shape
    if n < p:
        raise InvalidMatrix(f"need n >= p, got {a.shape}")
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    scale = np.abs(d)
    if scale.min() <= max(n, p) * np.finfo(float).eps * max(scale.max(), 1.0):
        raise RankDeficient("matrix is rank deficient")
    q = q * np.sign(d)
    return q
