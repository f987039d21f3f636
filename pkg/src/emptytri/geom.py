"""Exact planar geometry on an integer grid.

Every combinatorial decision (orientation, containment, collinearity) is made
in exact integer arithmetic.  Coordinates are bounded so that all 3-point
determinants fit in 128 bits; there is no floating-point epsilon anywhere in
this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# Exclusive coordinate bound.  |x|,|y| < 2^31 keeps the orientation
# determinant within signed 128-bit range.
COORD_BOUND = 2**31

# Coordinates at or below this magnitude allow the int64 fast paths
# (cross products of coordinate differences cannot overflow).
FAST_COORD_BOUND = 2**30 - 1

INTERIOR = "interior"
BOUNDARY = "boundary"
EXTERIOR = "exterior"

Point = tuple[int, int]


class GeometryError(ValueError):
    """Invalid geometric input: bounds, degeneracy, or file format."""


class GeneralPositionError(GeometryError):
    """Three collinear points where general position is required."""

    def __init__(self, triple, message=None):
        self.triple = tuple(int(i) for i in triple)
        if message is None:
            message = "points %d, %d, %d are collinear" % self.triple
        super().__init__(message)


def orientation(p, q, r) -> int:
    """Sign of the cross product (q-p) x (r-p): +1 ccw, -1 cw, 0 collinear."""
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (d > 0) - (d < 0)


def squared_distance(p, q) -> int:
    """Exact squared Euclidean distance in grid units."""
    dx = q[0] - p[0]
    dy = q[1] - p[1]
    return dx * dx + dy * dy


def point_in_triangle(p, a, b, c) -> str:
    """Classify p against the closed triangle abc.

    Returns one of INTERIOR, BOUNDARY, EXTERIOR.  The triangle must be
    non-degenerate; the answer comes from the three edge orientation signs.
    """
    s = orientation(a, b, c)
    if s == 0:
        raise GeometryError("degenerate triangle: vertices are collinear")
    s1 = orientation(a, b, p) * s
    s2 = orientation(b, c, p) * s
    s3 = orientation(c, a, p) * s
    if s1 > 0 and s2 > 0 and s3 > 0:
        return INTERIOR
    if s1 < 0 or s2 < 0 or s3 < 0:
        return EXTERIOR
    return BOUNDARY


class PointSet:
    """Ordered planar point configuration on the integer grid.

    ``scale`` records grid units per body-coordinate unit, so geometric
    thresholds given in body units convert exactly to grid units.
    """

    __slots__ = ("points", "scale")

    def __init__(self, points, scale=Fraction(1), *, validate=True):
        arr = np.array(points, dtype=np.int64)  # own copy; frozen below
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise GeometryError("points must be an (n, 2) integer array")
        scale = Fraction(scale)
        if scale <= 0:
            raise GeometryError("scale must be positive")
        if validate:
            if arr.size and int(np.abs(arr).max()) >= COORD_BOUND:
                raise GeometryError(
                    "coordinate magnitude exceeds the 2^31 grid bound"
                )
            seen = set()
            for i in range(arr.shape[0]):
                key = (int(arr[i, 0]), int(arr[i, 1]))
                if key in seen:
                    raise GeometryError("duplicate point at index %d" % i)
                seen.add(key)
        self.points = arr
        self.points.setflags(write=False)
        self.scale = scale

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self.point(i)

    def point(self, i) -> Point:
        return (int(self.points[i, 0]), int(self.points[i, 1]))

    def max_abs_coord(self) -> int:
        if len(self) == 0:
            return 0
        return int(np.abs(self.points).max())

    def body_coords(self) -> np.ndarray:
        """Points in body units (float), i.e. grid coordinates / scale."""
        return self.points.astype(np.float64) / float(self.scale)

    def __repr__(self):
        return "PointSet(n=%d, scale=%s)" % (len(self), self.scale)


@dataclass(frozen=True)
class AffineMap:
    """Exact rational affine map u -> M u + t with det(M) != 0."""

    m: tuple
    t: tuple = (Fraction(0), Fraction(0))

    def __post_init__(self):
        m = tuple(tuple(Fraction(v) for v in row) for row in self.m)
        t = tuple(Fraction(v) for v in self.t)
        if len(m) != 2 or any(len(row) != 2 for row in m) or len(t) != 2:
            raise GeometryError("affine map needs a 2x2 matrix and a 2-vector")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "t", t)
        if self.det() == 0:
            raise GeometryError("affine map must be non-degenerate")

    def det(self) -> Fraction:
        return self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]

    def apply_point(self, p):
        x = self.m[0][0] * p[0] + self.m[0][1] * p[1] + self.t[0]
        y = self.m[1][0] * p[0] + self.m[1][1] * p[1] + self.t[1]
        return (x, y)

    @staticmethod
    def identity() -> "AffineMap":
        return AffineMap(((1, 0), (0, 1)))


def apply_affine(ps: PointSet, amap: AffineMap) -> PointSet:
    """Image of a point set under an exact affine map.

    The image must land back on the integer grid within coordinate bounds
    (callers use integer unimodular maps in practice).
    """
    out = np.empty_like(ps.points)
    for i in range(len(ps)):
        x, y = amap.apply_point(ps.point(i))
        if x.denominator != 1 or y.denominator != 1:
            raise GeometryError(
                "affine image of point %d leaves the integer grid" % i
            )
        xi, yi = int(x), int(y)
        if abs(xi) >= COORD_BOUND or abs(yi) >= COORD_BOUND:
            raise GeometryError("affine image of point %d overflows" % i)
        out[i, 0] = xi
        out[i, 1] = yi
    return PointSet(out, ps.scale, validate=False)


def is_general_position(ps: PointSet):
    """Check that no three points are collinear.

    Brute force over all C(n,3) triples.  Returns ``(True, None)`` or
    ``(False, (i, j, k))`` with the first violating triple in lex order.
    """
    n = len(ps)
    if n < 3:
        return True, None
    if ps.max_abs_coord() <= FAST_COORD_BOUND:
        from . import _kernels

        i, j, k = _kernels.gp_brute(ps.points, n)
        if i < 0:
            return True, None
        return False, (int(i), int(j), int(k))
    pts = ps.points
    for i in range(n - 2):
        pi = (int(pts[i, 0]), int(pts[i, 1]))
        for j in range(i + 1, n - 1):
            pj = (int(pts[j, 0]), int(pts[j, 1]))
            for k in range(j + 1, n):
                pk = (int(pts[k, 0]), int(pts[k, 1]))
                if orientation(pi, pj, pk) == 0:
                    return False, (i, j, k)
    return True, None


# ---------------------------------------------------------------------------
# Shared point-set text format: "x y" per line, '#' comments, an optional
# "# scale <rational>" header.
# ---------------------------------------------------------------------------

def write_point_set(path, ps: PointSet, header: dict | None = None) -> None:
    lines = []
    if header:
        for key, value in header.items():
            lines.append("# %s %s" % (key, value))
    lines.append("# scale %s" % ps.scale)
    for x, y in ps:
        lines.append("%d %d" % (x, y))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_point_set(path) -> PointSet:
    scale = Fraction(1)
    pts = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if len(fields) >= 2 and fields[0] == "scale":
                    try:
                        scale = Fraction(fields[1])
                    except (ValueError, ZeroDivisionError):
                        raise GeometryError(
                            "line %d: bad scale %r" % (lineno, fields[1])
                        )
                continue
            fields = line.split()
            if len(fields) != 2:
                raise GeometryError(
                    "line %d: expected 'x y', got %r" % (lineno, line)
                )
            try:
                x, y = int(fields[0]), int(fields[1])
            except ValueError:
                raise GeometryError(
                    "line %d: coordinates must be integers" % lineno
                )
            pts.append((x, y))
    return PointSet(pts, scale)
