import numpy as np
import pytest

from stiefelstats import gaussian, grassmann, mstats, stiefel
from stiefelstats.errors import (
    InsufficientData,
    InvalidMatrix,
    RankDeficient,
)
from stiefelstats.gaussian import GaussianParams, coords_to_lift
from stiefelstats.mstats import ProductPoint
from stiefelstats.stiefel import StiefelPoint, manifold_dim, origin


def geodesic_cloud(n, p, count, rng, spread=0.3):
    o = origin(n, p)
    w = coords_to_lift(rng.standard_normal(manifold_dim(n, p)), n, p)
    w = w.scaled(1.0 / w.norm())
    return [stiefel.retract(o, w.scaled(t)) for t in rng.uniform(-spread, spread, count)]


# ---------------------------------------------------------------- PGA


def test_pga_single_geodesic_dominant_mode():
    rng = np.random.default_rng(0)
    pts = geodesic_cloud(8, 2, 80, rng)
    model = mstats.pga_fit(pts, k=manifold_dim(8, 2))
    assert model.variance_share(1) > 0.99
    assert np.all(np.diff(model.explained_variance) <= 1e-12)
    gram = model.directions @ model.directions.T
    assert np.abs(gram - np.eye(model.n_components)).max() < 1e-10


def test_pga_full_rank_reconstruction_is_identity():
    rng = np.random.default_rng(1)
    pts = geodesic_cloud(6, 2, 40, rng)
    model = mstats.pga_fit(pts, k=manifold_dim(6, 2))
    for x in pts[:10]:
        r = mstats.pga_reconstruct(model, x)
        assert stiefel.distance(x, r) < 1e-8


def test_pga_zero_components_returns_mean():
    rng = np.random.default_rng(2)
    pts = geodesic_cloud(6, 2, 30, rng)
    model = mstats.pga_fit(pts, k=2)
    assert mstats.pga_reconstruct(model, pts[0], k=0) is model.mean
    # projecting never increases the distance to the mean
    for x in pts[:5]:
        r = mstats.pga_reconstruct(model, x, k=1)
        assert stiefel.distance(x, r) <= stiefel.distance(x, model.mean) + 1e-10


def test_pga_isotropic_cloud_flat_spectrum():
    rng = np.random.default_rng(3)
    xbar = origin(5, 2)
    pts = gaussian.sample(GaussianParams(xbar, 0.1), 4000, rng)
    model = mstats.pga_fit(pts, k=1, mean=xbar)
    ev = model.explained_variance
    assert ev[0] / ev[-1] < 2.0


def test_pga_validation():
    rng = np.random.default_rng(4)
    pts = geodesic_cloud(5, 2, 20, rng)
    with pytest.raises(InsufficientData):
        mstats.pga_fit(pts[:1], k=1)
    with pytest.raises(InvalidMatrix):
        mstats.pga_fit(pts, k=99)


# ---------------------------------------------------------------- product metric


def make_product(rng, eu=None):
    u = stiefel.random_haar(5, 2, rng)
    return ProductPoint(u, euclidean=eu)


def test_product_distance_identity_and_components():
    rng = np.random.default_rng(5)
    x = ProductPoint(origin(5, 2), euclidean=np.array([1.0, 2.0]))
    assert mstats.product_distance(x, x) == 0.0
    y = ProductPoint(origin(5, 2), euclidean=np.array([4.0, 6.0]))
    assert np.isclose(mstats.product_distance(x, y), 5.0)  # euclidean part only
    with pytest.raises(InvalidMatrix):
        mstats.product_distance(x, ProductPoint(origin(5, 2)))


def test_product_distance_triangle_on_random_triples():
    # the chart distance can violate the triangle inequality along a shared
    # geodesic (third-order effect); random triples sit far from that case
    rng = np.random.default_rng(6)
    o = origin(4, 2)
    for _ in range(100):
        pts = [ProductPoint(x, euclidean=rng.standard_normal(3))
               for x in gaussian.sample(GaussianParams(o, 0.4), 3, rng)]
        d01 = mstats.product_distance(pts[0], pts[1])
        d12 = mstats.product_distance(pts[1], pts[2])
        d02 = mstats.product_distance(pts[0], pts[2])
        assert d02 <= d01 + d12 + 1e-12


# ---------------------------------------------------------------- k-means


def cluster_data(rng, n=10, p=3, k=3, per=20, sigma=0.05):
    dim = manifold_dim(n, p)
    o = origin(n, p)
    pts, labels = [], []
    for j in range(k):
        e = np.zeros(dim)
        e[j] = 0.45
        center = stiefel.retract(o, coords_to_lift(e, n, p))
        pts += [ProductPoint(x) for x in
                gaussian.sample(GaussianParams(center, sigma), per, rng)]
        labels += [j] * per
    return pts, labels


def test_kmeans_each_point_its_own_cluster():
    rng = np.random.default_rng(7)
    pts = [ProductPoint(x) for x in gaussian.sample(GaussianParams(origin(5, 2), 0.2),
                                                    4, rng)]
    res = mstats.kmeans(pts, 4, np.random.default_rng(0))
    assert res.inertia < 1e-20
    assert len(set(res.labels.tolist())) == 4


def test_kmeans_separated_clusters():
    rng = np.random.default_rng(8)
    pts, truth = cluster_data(rng)
    res = mstats.kmeans(pts, 3, np.random.default_rng(1))
    from stiefelstats.harness import label_accuracy
    assert label_accuracy(res.labels, truth, 3) == 1.0
    assert all(a >= b - 1e-9 for a, b in zip(res.inertia_history,
                                             res.inertia_history[1:]))


def test_kmeans_deterministic_under_seed():
    rng = np.random.default_rng(9)
    pts, _ = cluster_data(rng)
    r1 = mstats.kmeans(pts, 3, np.random.default_rng(5))
    r2 = mstats.kmeans(pts, 3, np.random.default_rng(5))
    assert np.array_equal(r1.labels, r2.labels)
    assert r1.inertia == r2.inertia


def test_kmeans_validation():
    rng = np.random.default_rng(10)
    pts = [ProductPoint(stiefel.random_haar(4, 1, rng))]
    with pytest.raises(InvalidMatrix):
        mstats.kmeans(pts, 2, np.random.default_rng(0))


# ---------------------------------------------------------------- ARMA


def simulate(a, c, horizon, rng, noise=0.0):
    p = a.shape[0]
    z = rng.standard_normal(p)
    f = np.empty((c.shape[0], horizon))
    for t in range(horizon):
        f[:, t] = c @ z
        z = a @ z
    if noise:
        f += noise * rng.standard_normal(f.shape)
    return f


def test_arma_recovers_noiseless_system():
    rng = np.random.default_rng(11)
    p = 3
    a = rng.standard_normal((p, p))
    a *= 0.9 / np.abs(np.linalg.eigvals(a)).max()
    c = stiefel.random_haar(8, p, rng).matrix
    model = mstats.arma_decompose(simulate(a, c, 200, rng), p)
    assert grassmann.principal_angle_distance(model.c, StiefelPoint(c)) < 1e-6
    eigs = np.sort_complex(np.linalg.eigvals(model.a))
    assert np.abs(eigs - np.sort_complex(np.linalg.eigvals(a))).max() < 1e-6
    assert np.abs(model.c.matrix.T @ model.c.matrix - np.eye(p)).max() < 1e-10


def test_arma_constant_features_unit_mode():
    f = np.tile(np.array([[1.0], [2.0], [-1.0]]), (1, 50))
    model = mstats.arma_decompose(f, 1)
    assert np.isclose(model.a[0, 0], 1.0, atol=1e-10)
    assert np.isclose(model.spectral_radius, 1.0, atol=1e-10)


def test_arma_white_noise_has_no_dynamics():
    rng = np.random.default_rng(12)
    vals = []
    for _ in range(30):
        f = rng.standard_normal((6, 200))
        vals.append(abs(mstats.arma_decompose(f, 1).a[0, 0]))
    assert np.mean(vals) < 0.2


def test_arma_errors():
    rng = np.random.default_rng(13)
    with pytest.raises(RankDeficient):
        mstats.arma_decompose(np.outer(rng.standard_normal(5),
                                       rng.standard_normal(40)), 3)
    with pytest.raises(InsufficientData):
        mstats.arma_decompose(rng.standard_normal((5, 3)), 3)
