import numpy as np
import pytest

from stiefelstats import stiefel
from stiefelstats.errors import InvalidMatrix, OutOfNeighborhood
from stiefelstats.stiefel import (
    REGULAR_BALL_RADIUS,
    GeodesicSegment,
    SkewLift,
    StiefelPoint,
    origin,
)


def random_tangent(n, p, rng, scale=1.0):
    c = rng.standard_normal((p, p))
    b = rng.standard_normal((n - p, p))
    w = SkewLift(c, b)
    return w.scaled(scale / w.norm())


def test_point_validation():
    with pytest.raises(InvalidMatrix):
        StiefelPoint(np.ones((4, 2)))
    with pytest.raises(InvalidMatrix):
        StiefelPoint(np.zeros((2, 3)))  # n < p
    x = origin(4, 2)
    with pytest.raises(ValueError):
        x.matrix[0, 0] = 5.0  # read-only


def test_point_repair_small_drift():
    rng = np.random.default_rng(0)
    m = stiefel.random_haar(6, 2, rng).matrix + 1e-8 * rng.standard_normal((6, 2))
    x = StiefelPoint(m)
    assert np.linalg.norm(x.matrix.T @ x.matrix - np.eye(2)) < 1e-12


def test_origin_and_dim():
    o = origin(5, 2)
    assert o.matrix[0, 0] == 1.0 and o.matrix[4, 1] == 0.0
    assert stiefel.manifold_dim(5, 2) == 7
    assert stiefel.manifold_dim(2, 1) == 1


def test_skewlift_norm_matches_full_matrix():
    rng = np.random.default_rng(1)
    w = random_tangent(7, 3, rng, scale=2.3)
    assert np.isclose(w.norm(), np.linalg.norm(w.full()))
    assert np.allclose(w.full(), -w.full().T)
    u = random_tangent(7, 3, rng)
    assert np.isclose(stiefel.inner(w, u), np.trace(w.full().T @ u.full()))


def test_roundtrip_small():
    rng = np.random.default_rng(2)
    o = origin(10, 3)
    for _ in range(20):
        w = random_tangent(10, 3, rng, scale=0.5)
        y = stiefel.retract(o, w)
        w2 = stiefel.lift(o, y)
        assert np.allclose(w2.c, w.c, atol=1e-10)
        assert np.allclose(w2.b, w.b, atol=1e-10)
        assert np.isclose(stiefel.distance(o, y), w.norm(), atol=1e-10)


def test_distance_symmetry():
    # lift(y, x) = -lift(x, y), so the chart distance is symmetric
    rng = np.random.default_rng(3)
    o = origin(8, 2)
    y = stiefel.retract(o, random_tangent(8, 2, rng, scale=0.7))
    assert np.isclose(stiefel.distance(o, y), stiefel.distance(y, o), atol=1e-12)


def test_geodesic_endpoints():
    rng = np.random.default_rng(4)
    x = stiefel.random_haar(6, 2, rng)
    y = stiefel.retract(x, random_tangent(6, 2, rng, scale=0.4))
    assert stiefel.geodesic_point(x, y, 0.0) is x
    end = stiefel.geodesic_point(x, y, 1.0)
    assert np.allclose(end.matrix, y.matrix, atol=1e-10)
    mid = stiefel.geodesic_point(x, y, 0.5)
    assert np.isclose(stiefel.distance(x, mid), 0.5 * stiefel.distance(x, y),
                      atol=1e-10)


def test_lift_out_of_neighborhood():
    # antipodal on the circle: X_u + Y_u = 0
    x = origin(2, 1)
    y = StiefelPoint(np.array([[-1.0], [0.0]]))
    with pytest.raises(OutOfNeighborhood):
        stiefel.lift(x, y)
    assert not stiefel.in_neighborhood(x, y)


def test_in_neighborhood_ball_cutoff():
    o = origin(2, 1)
    near = stiefel.retract(o, SkewLift(np.zeros((1, 1)), np.array([[0.5]])))
    assert stiefel.in_neighborhood(o, near)
    far_b = np.tan(0.49 * np.pi) / 1.0  # just inside the chart, outside the ball
    far = stiefel.retract(o, SkewLift(np.zeros((1, 1)), np.array([[far_b]])))
    assert stiefel.distance(o, far) > REGULAR_BALL_RADIUS
    assert not stiefel.in_neighborhood(o, far)


def test_random_haar_seeded():
    a = stiefel.random_haar(9, 4, np.random.default_rng(7))
    b = stiefel.random_haar(9, 4, np.random.default_rng(7))
    assert np.array_equal(a.matrix, b.matrix)
    assert np.allclose(a.matrix.T @ a.matrix, np.eye(4), atol=1e-12)


def test_batch_lifts_matches_loop():
    rng = np.random.default_rng(8)
    x = stiefel.random_haar(10, 3, rng)
    ys = [stiefel.retract(x, random_tangent(10, 3, rng, scale=0.3)) for _ in range(15)]
    mats = np.stack([y.matrix for y in ys])
    c, b, rcond = stiefel.batch_lifts(x, mats)
    for i, y in enumerate(ys):
        w = stiefel.lift(x, y)
        assert np.allclose(c[i], w.c, atol=1e-10)
        assert np.allclose(b[i], w.b, atol=1e-10)
    assert np.all(rcond > 1e-8)


def test_batch_lifts_flags_singular_entries():
    x = origin(2, 1)
    mats = np.array([[[1.0], [0.0]], [[-1.0], [0.0]]])
    c, b, rcond = stiefel.batch_lifts(x, mats)
    assert np.isfinite(c[0]).all()
    assert np.isnan(c[1]).all() and rcond[1] < 1e-8


def test_geodesic_segment_caches_lift():
    rng = np.random.default_rng(9)
    x = origin(6, 2)
    y = stiefel.retract(x, random_tangent(6, 2, rng, scale=0.6))
    seg = GeodesicSegment(x, y)
    assert np.isclose(seg.length(), stiefel.distance(x, y))
    assert seg.evaluate(0.0) is x and seg.evaluate(1.0) is y
    q = seg.evaluate(0.25)
    assert np.isclose(stiefel.distance(x, q), 0.25 * seg.length(), atol=1e-10)
