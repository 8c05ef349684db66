"""Statistics built on the Frechet mean: tangent PCA (principal geodesic
analysis), k-means on a product manifold, and closed-form ARMA subspace
identification.

PGA lifts the data to the chart at the Frechet mean, flattens the lifts to
the orthonormal free coordinates, and eigen-decomposes their covariance.
The k-means clusters (U, V, s) triples -- two Stiefel components and a
Euclidean component -- with inductive-FM centroid updates. The ARMA
decomposition reads a linear system f(t) = C z(t), z(t+1) = A z(t) off the
thin SVD of the stacked feature matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import estimators, matkit, stiefel
from .errors import InsufficientData, InvalidMatrix, OutOfNeighborhood, RankDeficient
from .gaussian import coords_to_lift, lift_to_coords
from .stiefel import SkewLift, StiefelPoint, lift, manifold_dim, retract


@dataclass(frozen=True)
class PgaModel:
    """Tangent-space principal components at the Frechet mean.

    ``directions`` has one orthonormal row per retained component in the
    flattened free-coordinate space; ``explained_variance`` carries the
    full eigenvalue spectrum, descending.
    """

    mean: StiefelPoint
    directions: np.ndarray  # (k, dim)
    explained_variance: np.ndarray  # (dim,), descending

    @property
    def n_components(self) -> int:
        return self.directions.shape[0]

    def variance_share(self, k: int) -> float:
        """Fraction of total tangent variance carried by the top k modes."""
        total = float(self.explained_variance.sum())
        return 1.0 if total == 0.0 else float(self.explained_variance[:k].sum()) / total


def pga_fit(samples: list[StiefelPoint], k: int,
            mean: Optional[StiefelPoint] = None) -> PgaModel:
    """Principal geodesic analysis of a sample on St(p, n).

    Finds the Frechet mean (batch descent, warm-started at the first
    sample) unless one is supplied, lifts every sample there, and
    diagonalizes the covariance of the flattened lift coordinates.
    """
    if len(samples) < 2:
        raise InsufficientData("need at least 2 samples")
    n, p = samples[0].n, samples[0].p
    dim = manifold_dim(n, p)
    if not 0 <= k <= dim:
        raise InvalidMatrix(f"component count must lie in [0, {dim}], got {k}")
    if mean is None:
        mean = estimators.batch_fm(samples, init=samples[0],
                                   tol=1e-9, max_iter=500).estimate
    coords = np.stack([lift_to_coords(lift(mean, x)) for x in samples])
    coords -= coords.mean(axis=0)
    cov = coords.T @ coords / len(samples)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    return PgaModel(mean, evecs[:, order[:k]].T.copy(), evals)


def pga_reconstruct(model: PgaModel, x: StiefelPoint, k: Optional[int] = None) -> StiefelPoint:
    """Project x onto the top-k principal geodesic submanifold.

    Lifts x at the model mean, keeps the top-k coordinate components, and
    retracts back. k defaults to all retained components; k=0 returns the
    mean.
    """
    if k is None:
        k = model.n_components
    if not 0 <= k <= model.n_components:
        raise InvalidMatrix(f"k must lie in [0, {model.n_components}], got {k}")
    if k == 0:
        return model.mean
    coords = lift_to_coords(lift(model.mean, x))
    d = model.directions[:k]
    proj = d.T @ (d @ coords)
    return retract(model.mean, coords_to_lift(proj, model.mean.n, model.mean.p))


@dataclass(frozen=True)
class ProductPoint:
    """Point on St(p, n) x St(n, n) x R^n; the last two parts optional."""

    stiefel_u: StiefelPoint
    stiefel_v: Optional[StiefelPoint] = None
    euclidean: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.euclidean is not None:
            e = np.asarray(self.euclidean, dtype=float)
            if e.ndim != 1 or not np.all(np.isfinite(e)):
                raise InvalidMatrix("euclidean part must be a finite 1-D vector")
            object.__setattr__(self, "euclidean", e)


def _compatible(x: ProductPoint, y: ProductPoint) -> None:
    if (x.stiefel_v is None) != (y.stiefel_v is None) or \
            (x.euclidean is None) != (y.euclidean is None):
        raise InvalidMatrix("points carry different product components")
    if x.euclidean is not None and x.euclidean.shape != y.euclidean.shape:
        raise InvalidMatrix("euclidean parts differ in length")


def product_distance(x: ProductPoint, y: ProductPoint,
                     weights: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> float:
    """Root weighted sum of squared componentwise distances.

    Stiefel components use the chart distance; pairs outside each other's
    chart get +inf.
    """
    _compatible(x, y)
    try:
        d2 = weights[0] * stiefel.distance(x.stiefel_u, y.stiefel_u) ** 2
        if x.stiefel_v is not None:
            d2 += weights[1] * stiefel.distance(x.stiefel_v, y.stiefel_v) ** 2
    except OutOfNeighborhood:
        return np.inf
    if x.euclidean is not None:
        d2 += weights[2] * float(np.sum((x.euclidean - y.euclidean) ** 2))
    return float(np.sqrt(d2))


@dataclass
class KmeansResult:
    labels: np.ndarray
    centroids: list[ProductPoint]
    inertia: float
    n_iter: int
    inertia_history: list[float] = field(default_factory=list)


def _component_mean(points: list[ProductPoint], member_idx: np.ndarray,
                    old: ProductPoint,
                    weights: tuple[float, float, float]) -> ProductPoint:
    members = [points[i] for i in member_idx]
    u = estimators.ifme([m.stiefel_u for m in members]).estimate
    v = None
    if old.stiefel_v is not None:
        v = estimators.ifme([m.stiefel_v for m in members]).estimate
    e = None
    if old.euclidean is not None:
        e = np.mean([m.euclidean for m in members], axis=0)
    return ProductPoint(u, v, e)


def kmeans(points: list[ProductPoint], k: int, rng: np.random.Generator,
           max_iter: int = 100,
           weights: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> KmeansResult:
    """Lloyd iteration on the product manifold.

    Farthest-first seeding from an rng-chosen start, assignment by
    product_distance, inductive-FM centroid updates per component; an
    emptied cluster is re-seeded with the point farthest from its current
    centroid. Stops on stable assignments or max_iter.
    """
    if not 1 <= k <= len(points):
        raise InvalidMatrix(f"need 1 <= k <= {len(points)}, got {k}")
    # farthest-first seeding
    centroids = [points[int(rng.integers(len(points)))]]
    mind = np.array([product_distance(p, centroids[0], weights) for p in points])
    for _ in range(1, k):
        centroids.append(points[int(np.argmax(mind))])
        d = np.array([product_distance(p, centroids[-1], weights) for p in points])
        mind = np.minimum(mind, d)

    labels = np.full(len(points), -1)
    history: list[float] = []
    for it in range(1, max_iter + 1):
        dists = np.array([[product_distance(p, c, weights) for c in centroids]
                          for p in points])
        new_labels = np.argmin(dists, axis=1)
        for j in range(k):  # re-seed emptied clusters
            if not np.any(new_labels == j):
                far = int(np.argmax(dists[np.arange(len(points)), new_labels]))
                centroids[j] = points[far]
                new_labels[far] = j
        inertia = float(np.sum(dists[np.arange(len(points)), new_labels] ** 2))
        history.append(inertia)
        if np.array_equal(new_labels, labels):
            return KmeansResult(labels, centroids, inertia, it, history)
        labels = new_labels
        centroids = [_component_mean(points, np.flatnonzero(labels == j),
                                     centroids[j], weights) for j in range(k)]
    dists = np.array([[product_distance(p, c, weights) for c in centroids]
                      for p in points])
    inertia = float(np.sum(np.min(dists, axis=1) ** 2))
    return KmeansResult(labels, centroids, inertia, max_iter, history)


@dataclass(frozen=True)
class ArmaModel:
    """Linear system f(t) = C z(t) + w(t), z(t+1) = A z(t) + v(t)."""

    c: StiefelPoint  # n x p measurement matrix
    a: np.ndarray  # p x p transition matrix
    sigma: np.ndarray  # retained singular values, descending

    @property
    def spectral_radius(self) -> float:
        """Largest |eigenvalue| of A; > 1 flags an unstable fit (diagnostic
        only, not enforced)."""
        return float(np.abs(np.linalg.eigvals(self.a)).max())


def arma_decompose(features: np.ndarray, p: int) -> ArmaModel:
    """Closed-form subspace identification from an n x T feature matrix.

    Thin SVD F = U S V^T gives C = U_p and states Z = S_p V_p^T; the
    transition matrix is the least-squares one-step predictor
    A = S_p (V2^T V1)(V1^T V1)^{-1} S_p^{-1} with V1, V2 the first/last
    T-1 rows of V_p (the time-shifted state selectors).
    """
    f = np.asarray(features, dtype=float)
    if f.ndim != 2:
        raise InvalidMatrix(f"features must be 2-D, got shape {f.shape}")
    n, t = f.shape
    if t < p + 1:
        raise InsufficientData(f"need at least {p + 1} time columns, got {t}")
    if not 1 <= p <= n:
        raise InvalidMatrix(f"state dimension must lie in [1, {n}], got {p}")
    u, s, v = matkit.thin_svd(f)
    if s[p - 1] <= max(n, t) * np.finfo(float).eps * s[0]:
        raise RankDeficient(f"features have numerical rank < {p}")
    vp = v[:, :p]
    v1, v2 = vp[:-1, :], vp[1:, :]
    sp = s[:p]
    shift = matkit.solve_linear(v1.T @ v1, v1.T)
    a = (sp[:, None] * (v2.T @ shift.T)) / sp[None, :]
    return ArmaModel(StiefelPoint(u[:, :p]), a, sp.copy())
