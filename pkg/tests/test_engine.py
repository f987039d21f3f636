import math

import numpy as np
import pytest

from emptytri.engine import (
    EmptyTriangleReport,
    brute_force_empty_triangles,
    degree_report,
    enumerate_empty_triangles,
    near_pairs,
    near_pairs_scan,
    pair_degree,
    thresholded_degree_sum,
)
from emptytri.geom import (
    AffineMap,
    GeneralPositionError,
    GeometryError,
    PointSet,
    apply_affine,
)

from conftest import random_gp_set

# spec'd worked examples
FIVE = PointSet([(0, 0), (10, 0), (10, 10), (0, 10), (5, 4)])
INNER = PointSet([(0, 0), (6, 0), (3, 5), (3, 2)])


def convex_points(n):
    """n points on a parabola: strictly convex, never collinear."""
    return PointSet([(i, i * i) for i in range(n)])


def test_triangle_minimal():
    r = degree_report(PointSet([(0, 0), (5, 1), (2, 7)]))
    assert r.f == 1 and r.deg_max == 1
    assert all(r.degree(i, j) == 1 for i in range(2) for j in range(i + 1, 3))


def test_four_convex():
    r = degree_report(PointSet([(0, 0), (10, 0), (11, 9), (1, 10)]))
    assert r.f == 4
    assert r.deg_max == 2
    assert all(r.degree(i, j) == 2 for i in range(3) for j in range(i + 1, 4))


def test_inner_point_example():
    r = degree_report(INNER)
    assert r.f == 3
    assert r.degree(0, 1) == r.degree(0, 2) == r.degree(1, 2) == 1
    assert r.degree(0, 3) == r.degree(1, 3) == r.degree(2, 3) == 2
    assert r.deg_max == 2


def test_five_point_example():
    r = degree_report(FIVE)
    assert r.f == 8
    assert r.deg_max == 3
    assert r.degree(0, 4) == 3
    assert r.degree(0, 1) == 1
    tris = []
    f = enumerate_empty_triangles(FIVE, lambda i, j, k: tris.append((i, j, k)))
    assert f == 8 and len(tris) == 8
    assert (0, 1, 2) not in tris and (0, 1, 3) not in tris  # both contain e
    assert all(i < j < k for i, j, k in tris)
    assert len(set(tris)) == 8


def test_convex_position_formula():
    for n in range(3, 31):
        r = degree_report(convex_points(n))
        assert r.f == math.comb(n, 3)
        assert r.deg_max == n - 2


def test_oracle_convex():
    for n in (5, 9):
        a = degree_report(convex_points(n))
        b = brute_force_empty_triangles(convex_points(n))
        assert a.same_as(b)


def test_general_position_error_names_triple():
    bad = PointSet([(0, 0), (5, 5), (10, 10), (3, 7)])
    with pytest.raises(GeneralPositionError) as err:
        degree_report(bad)
    assert sorted(err.value.triple) == [0, 1, 2]
    with pytest.raises(GeneralPositionError):
        brute_force_empty_triangles(bad)


def test_handshake_and_bounds(rng):
    for _ in range(30):
        n = int(rng.integers(5, 25))
        ps = random_gp_set(rng, n)
        r = degree_report(ps)
        assert int(r.degrees.sum(dtype=np.int64)) == 3 * r.f
        assert r.deg_max <= n - 2
        assert r.f >= n * n - 5 * n
        assert r.f <= math.comb(n, 3)


def test_affine_invariance(rng):
    for _ in range(10):
        ps = random_gp_set(rng, 20, box=10**4)
        r = degree_report(ps)
        a = int(rng.integers(-3, 4))
        b = int(rng.integers(-3, 4))
        # unimodular: product of integer shears, det +1
        m = AffineMap(((1, a), (0, 1)))
        m2 = AffineMap(((1, 0), (b, 1)), (7, -11))
        out = apply_affine(apply_affine(ps, m), m2)
        r2 = degree_report(out)
        assert r.same_as(r2)


def test_python_fallback_matches_fast_path(rng):
    base = rng.integers(0, 5000, size=(12, 2))
    ps_small = PointSet(base)
    from emptytri.geom import is_general_position

    ok, _ = is_general_position(ps_small)
    if not ok:
        pytest.skip("rare collinear draw")
    shifted = PointSet(base + (2**30 + 17))  # beyond the int64 fast bound
    r1 = degree_report(ps_small)
    r2 = degree_report(shifted)
    assert r1.same_as(r2)
    f1 = enumerate_empty_triangles(ps_small)
    f2 = enumerate_empty_triangles(shifted)
    assert f1 == f2 == r1.f


def test_pair_degree_examples():
    assert pair_degree(PointSet([(0, 0), (5, 1), (2, 7)]), 0, 1) == 1
    assert pair_degree(FIVE, 0, 4) == 3
    assert pair_degree(FIVE, 0, 1) == 1
    with pytest.raises(IndexError):
        pair_degree(FIVE, 0, 9)


def test_pair_degree_matches_report(rng):
    ps = random_gp_set(rng, 15)
    r = degree_report(ps)
    for i, j in [(0, 1), (2, 9), (4, 14), (7, 8)]:
        assert pair_degree(ps, i, j) == r.degree(i, j)


def test_oracle_cap():
    with pytest.raises(GeometryError):
        brute_force_empty_triangles(convex_points(100), cap=64)


def test_report_argmax_tiebreak():
    # 4 convex points: every pair has degree 2; smallest pair wins
    r = degree_report(PointSet([(0, 0), (10, 0), (11, 9), (1, 10)]))
    assert r.argmax_pair == (0, 1)


def test_degree_histogram():
    r = degree_report(FIVE)
    hist = r.degree_histogram()
    assert sum(hist) == 10  # C(5,2) pairs
    assert sum(d * c for d, c in enumerate(hist)) == 3 * r.f


# --- near pairs ---------------------------------------------------------


def test_near_pairs_examples():
    ps = PointSet([(0, 0), (1, 0), (0, 1)])
    stat = near_pairs(ps, 1.0)
    assert stat.count == 2  # the sqrt(2) pair is excluded
    tiny = near_pairs(FIVE, 0.5)
    assert tiny.count == 0


def test_near_pairs_matches_scan(rng):
    for _ in range(20):
        n = int(rng.integers(2, 300))
        ps = PointSet(
            np.unique(rng.integers(-10**6, 10**6, size=(n, 2)), axis=0)
        )
        for t in (1.0, 1000.0, 50000.0, 5 * 10**6):
            assert near_pairs(ps, t).count == near_pairs_scan(ps, t)


def test_near_pairs_collect(rng):
    ps = random_gp_set(rng, 40, box=1000)
    stat = near_pairs(ps, 200.0, collect_pairs=True)
    assert stat.count == len(stat.pair_list)
    for i, j in stat.pair_list:
        dx = ps.point(j)[0] - ps.point(i)[0]
        dy = ps.point(j)[1] - ps.point(i)[1]
        assert dx * dx + dy * dy <= stat.threshold_sq


def test_near_pairs_threshold_rounding():
    from fractions import Fraction

    ps = PointSet([(0, 0), (2, 0)], scale=Fraction(1))
    stat = near_pairs(ps, 1.5)
    assert stat.threshold_sq == 2  # floor(2.25)
    assert stat.rounded_down
    assert stat.count == 0
    assert near_pairs(ps, 2.0).count == 1


def test_near_pairs_rejects_bad_threshold():
    with pytest.raises(GeometryError):
        near_pairs(FIVE, 0.0)


# --- thresholded degree sum ---------------------------------------------


def test_thresholded_sum_empty_and_full():
    assert thresholded_degree_sum(FIVE, 0.5) == 0  # below min distance
    r = degree_report(FIVE)
    assert thresholded_degree_sum(FIVE, 100.0) == 3 * r.f  # all pairs


def test_thresholded_sum_single_pair():
    # scaled and nudged 5-point configuration: moving e off the symmetry
    # axis makes (a, e) the strict closest pair, so a threshold just above
    # it qualifies exactly one pair and the sum equals that pair's degree
    big = PointSet([(0, 0), (1000, 0), (1000, 1000), (0, 1000), (499, 400)])
    dists = sorted(
        math.dist(big.point(i), big.point(j))
        for i in range(4) for j in range(i + 1, 5)
    )
    assert dists[0] < dists[1]  # strictly isolated closest pair
    t = (dists[0] + dists[1]) / 2.0
    r = degree_report(big)
    got = thresholded_degree_sum(big, t)
    assert got == r.degree(0, 4)
    assert got == pair_degree(big, 0, 4)


def test_thresholded_sum_routes_agree(rng):
    ps = random_gp_set(rng, 20, box=1000)
    r = degree_report(ps)
    for t in (50.0, 300.0, 2000.0):
        assert thresholded_degree_sum(ps, t) == thresholded_degree_sum(ps, t, report=r)


def test_majorization_inequality(rng):
    for _ in range(10):
        ps = random_gp_set(rng, 18, box=10**4)
        r = degree_report(ps)
        for t in (100.0, 3000.0, 10**4):
            stat = near_pairs(ps, t)
            assert thresholded_degree_sum(ps, t, report=r) <= stat.count * r.deg_max
