import numpy as np
import pytest

from emptytri.geom import (
    BOUNDARY,
    EXTERIOR,
    INTERIOR,
    AffineMap,
    GeometryError,
    PointSet,
    apply_affine,
    is_general_position,
    orientation,
    point_in_triangle,
    read_point_set,
    squared_distance,
    write_point_set,
)

from conftest import random_gp_set


def test_orientation_basic():
    assert orientation((0, 0), (1, 0), (0, 1)) == 1
    assert orientation((0, 0), (1, 0), (2, 0)) == 0
    assert orientation((0, 0), (0, 1), (1, 0)) == -1


def test_orientation_antisymmetry(rng):
    for _ in range(200):
        p, q, r = [tuple(int(v) for v in rng.integers(-50, 50, 2)) for _ in range(3)]
        assert orientation(p, q, r) == -orientation(q, p, r)
        assert orientation(p, q, r) == -orientation(p, r, q)
        assert orientation(p, q, r) == orientation(q, r, p)


def test_orientation_exact_at_bounds():
    # near-collinear triple that floating point would misjudge
    big = 2**31 - 2
    assert orientation((0, 0), (big, 1), (big - 1, 1)) == 1
    assert orientation((0, 0), (big, big), (big - 1, big - 1)) == 0


def test_point_in_triangle_classification():
    a, b, c = (0, 0), (6, 0), (0, 6)
    assert point_in_triangle((1, 1), a, b, c) == INTERIOR
    assert point_in_triangle((3, 0), a, b, c) == BOUNDARY
    assert point_in_triangle((7, 7), a, b, c) == EXTERIOR
    assert point_in_triangle((0, 0), a, b, c) == BOUNDARY  # vertex


def test_point_in_triangle_permutation_invariance(rng):
    from itertools import permutations

    for _ in range(50):
        tri = [tuple(int(v) for v in rng.integers(0, 60, 2)) for _ in range(3)]
        if orientation(*tri) == 0:
            continue
        p = tuple(int(v) for v in rng.integers(0, 60, 2))
        ref = point_in_triangle(p, *tri)
        for perm in permutations(tri):
            assert point_in_triangle(p, *perm) == ref


def test_point_in_triangle_degenerate():
    with pytest.raises(GeometryError):
        point_in_triangle((1, 1), (0, 0), (1, 0), (2, 0))


def test_squared_distance():
    assert squared_distance((0, 0), (3, 4)) == 25
    assert squared_distance((5, 5), (5, 5)) == 0
    assert squared_distance((0, 0), (1, 1)) == 2


def test_is_general_position():
    ok, _ = is_general_position(PointSet([(0, 0), (1, 0), (0, 1)]))
    assert ok
    ok, triple = is_general_position(PointSet([(0, 0), (1, 0), (2, 0)]))
    assert not ok and triple == (0, 1, 2)
    ok, _ = is_general_position(PointSet([(0, 0), (4, 1), (1, 4), (5, 5)]))
    assert ok


def test_point_set_validation():
    with pytest.raises(GeometryError):
        PointSet([(0, 0), (0, 0)])
    with pytest.raises(GeometryError):
        PointSet([(2**31, 0)])
    ps = PointSet([])
    assert len(ps) == 0


def test_apply_affine_identity_and_shear():
    ps = PointSet([(0, 0), (1, 0), (0, 1)])
    same = apply_affine(ps, AffineMap.identity())
    assert np.array_equal(same.points, ps.points)
    shear = AffineMap(((1, 1), (0, 1)))
    out = apply_affine(ps, shear)
    assert [tuple(p) for p in out] == [(0, 0), (1, 0), (1, 1)]


def test_apply_affine_orientation_signs(rng):
    ps = random_gp_set(rng, 8, box=1000)
    rot = AffineMap(((0, -1), (1, 0)))  # det +1
    refl = AffineMap(((-1, 0), (0, 1)))  # det -1
    out_r = apply_affine(ps, rot)
    out_f = apply_affine(ps, refl)
    idx = [(0, 1, 2), (1, 3, 5), (2, 4, 7)]
    for i, j, k in idx:
        s = orientation(ps.point(i), ps.point(j), ps.point(k))
        assert orientation(out_r.point(i), out_r.point(j), out_r.point(k)) == s
        assert orientation(out_f.point(i), out_f.point(j), out_f.point(k)) == -s
    ok, _ = is_general_position(out_r)
    assert ok


def test_apply_affine_errors():
    ps = PointSet([(0, 0), (1, 0), (0, 1)])
    halfmap = AffineMap((("1/2", 0), (0, 1)))
    with pytest.raises(GeometryError):
        apply_affine(ps, halfmap)
    bigmap = AffineMap(((2**31, 0), (0, 1)))
    with pytest.raises(GeometryError):
        apply_affine(PointSet([(2, 0), (3, 0), (0, 1)]), bigmap)
    with pytest.raises(GeometryError):
        AffineMap(((1, 1), (1, 1)))  # det 0


def test_point_file_roundtrip(tmp_path, rng):
    ps = random_gp_set(rng, 12)
    path = tmp_path / "pts.txt"
    write_point_set(path, ps, header={"note": "test"})
    back = read_point_set(path)
    assert np.array_equal(back.points, ps.points)
    assert back.scale == ps.scale


def test_point_file_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3\n")
    with pytest.raises(GeometryError, match="line 2"):
        read_point_set(bad)
    bad.write_text("1 2\nx y\n")
    with pytest.raises(GeometryError, match="line 2"):
        read_point_set(bad)
    good = tmp_path / "scaled.txt"
    good.write_text("# scale 4/3\n1 2\n")
    ps = read_point_set(good)
    from fractions import Fraction

    assert ps.scale == Fraction(4, 3)
