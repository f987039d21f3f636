"""Convex sampling domains, normalization, uniform/Poisson sampling, and the
mesh-grid occupancy machinery.

Bodies are normalized to area 1 with the centroid at the origin.  Samples
are quantized to a dyadic integer grid (2^28 units per body unit) so that
body coordinates of sampled points are exact binary floats and all
downstream combinatorics stays in exact integer arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .geom import GeometryError, PointSet

GRID_SCALE = 2**28  # grid units per body unit; a power of two keeps
                    # quantized coordinates exact as floats

# sampler coordinates must stay below 2^29 for the collinearity kernel
_MAX_BODY_RADIUS = 1.99

AREA_TOL = 1e-12


@dataclass
class RealAffineMap:
    """Float affine map u -> M u + t (used for body normalization)."""

    m: np.ndarray
    t: np.ndarray

    def apply(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return pts @ self.m.T + self.t


@dataclass
class ConvexBody:
    """Sampling domain: a strictly convex ccw polygon or an ellipse.

    ``inscribed_radius_hint`` is the radius of the origin-centered inscribed
    disk and ``circumscribed_radius_hint`` the farthest boundary distance;
    both are meaningful after normalization.  ``rho`` is half the inscribed
    radius: every point of the rho-disk sits at least rho away from the
    boundary, which is the window where near-pair degree bounds apply.
    """

    kind: str  # "polygon" | "ellipse"
    vertices: np.ndarray | None = None
    center: np.ndarray | None = None
    semi_axes: tuple[float, float] | None = None
    rotation: float = 0.0
    inscribed_radius_hint: float = 0.0
    circumscribed_radius_hint: float = 0.0
    normalized: bool = False

    def __post_init__(self):
        if self.kind == "polygon":
            v = np.asarray(self.vertices, dtype=np.float64)
            if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
                raise GeometryError("polygon needs >= 3 vertices")
            if _polygon_area(v) <= 0:
                raise GeometryError("polygon vertices must be counterclockwise")
            k = v.shape[0]
            for i in range(k):
                a, b, c = v[i], v[(i + 1) % k], v[(i + 2) % k]
                cr = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                if cr <= 0:
                    raise GeometryError("polygon must be strictly convex")
            self.vertices = v
        elif self.kind == "ellipse":
            self.center = np.asarray(
                self.center if self.center is not None else (0.0, 0.0),
                dtype=np.float64,
            )
            if self.semi_axes is None:
                raise GeometryError("ellipse needs semi_axes")
            a, b = float(self.semi_axes[0]), float(self.semi_axes[1])
            if a <= 0 or b <= 0:
                raise GeometryError("ellipse semi-axes must be positive")
            self.semi_axes = (a, b)
        else:
            raise GeometryError("unknown body kind %r" % self.kind)

    @property
    def area(self) -> float:
        if self.kind == "polygon":
            return _polygon_area(self.vertices)
        a, b = self.semi_axes
        return math.pi * a * b

    @property
    def rho(self) -> float:
        return self.inscribed_radius_hint / 2.0

    def contains(self, pts, tol: float = 1e-12) -> np.ndarray:
        """Vectorized membership test in body coordinates."""
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        if self.kind == "ellipse":
            if not self.normalized:
                raise GeometryError("containment test needs a normalized body")
            r = self.semi_axes[0]
            return (pts[:, 0] ** 2 + pts[:, 1] ** 2) <= r * r * (1.0 + tol) + tol
        v = self.vertices
        k = v.shape[0]
        ok = np.ones(len(pts), dtype=bool)
        for i in range(k):
            ex = v[(i + 1) % k, 0] - v[i, 0]
            ey = v[(i + 1) % k, 1] - v[i, 1]
            cr = ex * (pts[:, 1] - v[i, 1]) - ey * (pts[:, 0] - v[i, 0])
            ok &= cr >= -tol
        return ok


def _polygon_area(v) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _polygon_centroid(v) -> np.ndarray:
    x, y = v[:, 0], v[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = cross.sum() / 2.0
    cx = float(((x + np.roll(x, -1)) * cross).sum() / (6.0 * area))
    cy = float(((y + np.roll(y, -1)) * cross).sum() / (6.0 * area))
    return np.array([cx, cy])


def _polygon_second_moment(v) -> np.ndarray:
    """Covariance of the uniform measure on the polygon (centroid removed)."""
    c = _polygon_centroid(v)
    w = v - c
    area = 0.0
    m = np.zeros((2, 2))
    k = w.shape[0]
    for i in range(k):
        p1 = w[i]
        p2 = w[(i + 1) % k]
        a = (p1[0] * p2[1] - p2[0] * p1[1]) / 2.0
        area += a
        s = p1 + p2
        m += (a / 12.0) * (np.outer(p1, p1) + np.outer(p2, p2) + np.outer(s, s))
    return m / area


def _origin_inscribed_radius(v) -> float:
    """Distance from the origin to the nearest polygon edge line."""
    k = v.shape[0]
    best = math.inf
    for i in range(k):
        p1 = v[i]
        p2 = v[(i + 1) % k]
        e = p2 - p1
        d = abs(e[0] * (-p1[1]) - e[1] * (-p1[0])) / math.hypot(e[0], e[1])
        best = min(best, d)
    return best


def normalize_body(body: ConvexBody) -> tuple[ConvexBody, RealAffineMap]:
    """Map a body to standard position: area 1, centroid at the origin.

    Ellipses become the origin-centered disk of radius 1/sqrt(pi) (the exact
    closed form).  Polygons get a symmetric whitening of their second-moment
    matrix plus the area rescale; the inscribed/circumscribed radius hints
    are recorded afterwards.
    """
    if body.kind == "ellipse":
        a, b = body.semi_axes
        phi = body.rotation
        rot = np.array([[math.cos(-phi), -math.sin(-phi)],
                        [math.sin(-phi), math.cos(-phi)]])
        s = np.diag([1.0 / a, 1.0 / b])
        r_std = 1.0 / math.sqrt(math.pi)
        m = r_std * (s @ rot)
        t = -m @ body.center
        out = ConvexBody(
            kind="ellipse",
            center=np.zeros(2),
            semi_axes=(r_std, r_std),
            rotation=0.0,
            inscribed_radius_hint=r_std,
            circumscribed_radius_hint=r_std,
            normalized=True,
        )
        return out, RealAffineMap(m=m, t=t)
    v = body.vertices
    area = _polygon_area(v)
    if area <= 0:
        raise GeometryError("degenerate polygon")
    c = _polygon_centroid(v)
    cov = _polygon_second_moment(v)
    evals, evecs = np.linalg.eigh(cov)
    if evals.min() <= 0:
        raise GeometryError("degenerate polygon (zero second moment)")
    # symmetric whitening: no arbitrary rotation for symmetric bodies
    w = evecs @ np.diag(evals ** -0.5) @ evecs.T
    v1 = (v - c) @ w.T
    area1 = _polygon_area(v1)
    s = 1.0 / math.sqrt(area1)
    m = s * w
    v2 = (v - c) @ m.T
    circ = float(np.max(np.hypot(v2[:, 0], v2[:, 1])))
    if circ >= _MAX_BODY_RADIUS:
        raise GeometryError("normalized body too eccentric for the sampler grid")
    out = ConvexBody(
        kind="polygon",
        vertices=v2,
        inscribed_radius_hint=_origin_inscribed_radius(v2),
        circumscribed_radius_hint=circ,
        normalized=True,
    )
    if abs(out.area - 1.0) > AREA_TOL * max(1.0, abs(out.area)):
        raise GeometryError("normalization failed to reach area 1")
    return out, RealAffineMap(m=m, t=-m @ c)


def unit_square_body() -> ConvexBody:
    return ConvexBody(kind="polygon",
                      vertices=np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def unit_disk_body() -> ConvexBody:
    return ConvexBody(kind="ellipse", center=np.zeros(2), semi_axes=(1.0, 1.0))


def trial_generator(seed: int, n: int, trial: int) -> np.random.Generator:
    """Counter-based stream for trial ``trial`` at size ``n``.

    Philox keyed on (seed, n << 32 ^ trial): independent streams, no shared
    state, identical draws regardless of execution order.
    """
    key = np.array(
        [np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
         np.uint64(((n & 0xFFFFFFFF) << 32) ^ (trial & 0xFFFFFFFF))],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def _draw_body_points(body: ConvexBody, rng, count: int) -> np.ndarray:
    """count uniform float points in a normalized body."""
    if body.kind == "ellipse":
        r = body.semi_axes[0]
        rad = r * np.sqrt(rng.uniform(0.0, 1.0, count))
        phi = rng.uniform(0.0, 2.0 * math.pi, count)
        return np.column_stack([rad * np.cos(phi), rad * np.sin(phi)])
    v = body.vertices
    k = v.shape[0]
    tri_areas = np.empty(k - 2)
    for i in range(k - 2):
        tri_areas[i] = _polygon_area(np.array([v[0], v[i + 1], v[i + 2]]))
    weights = tri_areas / tri_areas.sum()
    choice = rng.choice(k - 2, size=count, p=weights)
    u = np.sqrt(rng.uniform(0.0, 1.0, count))
    w = rng.uniform(0.0, 1.0, count)
    a = v[0]
    b = v[choice + 1]
    c = v[choice + 2]
    pts = (1.0 - u)[:, None] * a + (u * (1.0 - w))[:, None] * b + (u * w)[:, None] * c
    return pts


def _quantize(pts_float: np.ndarray) -> np.ndarray:
    q = np.rint(pts_float * GRID_SCALE).astype(np.int64)
    if q.size and int(np.abs(q).max()) >= 2**29:
        raise GeometryError("quantized coordinate outside the sampler grid")
    return q


def sample_uniform(
    body: ConvexBody,
    n: int,
    seed: int,
    *,
    trial: int = 0,
    ensure_general_position: bool = True,
    fixed_prefix: np.ndarray | None = None,
) -> PointSet:
    """n independent uniform points from a normalized body, quantized.

    Deterministic given (body, n, seed, trial).  A duplicate or a
    quantization-induced collinear triple triggers resampling of the newest
    point.  ``fixed_prefix`` pre-seeds quantized points that are kept as-is
    (used when conditioning on a fixed pair).
    """
    if not body.normalized:
        raise GeometryError("sample_uniform needs a normalized body")
    if n < 0:
        raise GeometryError("n must be nonnegative")
    rng = trial_generator(seed, n, trial)
    npre = 0 if fixed_prefix is None else len(fixed_prefix)
    total = n + npre
    pts = np.empty((total, 2), dtype=np.int64)
    seen = set()
    if npre:
        pts[:npre] = fixed_prefix
        for t in range(npre):
            seen.add((int(pts[t, 0]), int(pts[t, 1])))
    have = npre
    while have < total:
        batch = _quantize(_draw_body_points(body, rng, total - have))
        for t in range(batch.shape[0]):
            x, y = int(batch[t, 0]), int(batch[t, 1])
            if (x, y) in seen:
                continue
            if ensure_general_position and have >= 2:
                if not _kernels.gp_new_point_ok(pts, have, x, y):
                    continue
            pts[have, 0] = x
            pts[have, 1] = y
            seen.add((x, y))
            have += 1
    return PointSet(pts, Fraction(GRID_SCALE), validate=False)


def sample_uniform_raw(body: ConvexBody, n: int, seed: int, *, trial: int = 0) -> PointSet:
    """Uniform sample with duplicate rejection but no collinearity pass.

    Distance and occupancy statistics are insensitive to collinear triples;
    experiments that never enumerate triangles use this faster variant.
    """
    return sample_uniform(body, n, seed, trial=trial, ensure_general_position=False)


# ---------------------------------------------------------------------------
# Mesh grid, occupancy, and the Poissonized counterpart
# ---------------------------------------------------------------------------

@dataclass
class GridSquares:
    """The first n/2 mesh-1/sqrt(n) squares fully inside the body, row-major."""

    n: int
    mesh: float
    index: np.ndarray  # (M, 2) int cell indices (ix, iy)
    cell_of: dict = field(repr=False, default_factory=dict)

    @property
    def m(self) -> int:
        return self.index.shape[0]

    def bounds(self, j: int) -> tuple[float, float, float, float]:
        ix, iy = self.index[j]
        h = self.mesh
        return (ix * h, iy * h, (ix + 1) * h, (iy + 1) * h)


def build_grid(body: ConvexBody, n: int) -> GridSquares:
    """Deterministic selection of n/2 fully-inside mesh squares.

    The grid is anchored at the origin with mesh 1/sqrt(n); squares are
    scanned in row-major order (rows bottom to top, cells left to right).
    """
    if not body.normalized:
        raise GeometryError("build_grid needs a normalized body")
    if n <= 0 or n % 2 != 0:
        raise GeometryError("n must be positive and even")
    h = 1.0 / math.sqrt(n)
    need = n // 2
    rad = body.circumscribed_radius_hint + h
    lo = int(math.floor(-rad / h)) - 1
    hi = int(math.ceil(rad / h)) + 1
    chosen = []
    for iy in range(lo, hi + 1):
        for ix in range(lo, hi + 1):
            corners = np.array(
                [
                    [ix * h, iy * h],
                    [(ix + 1) * h, iy * h],
                    [(ix + 1) * h, (iy + 1) * h],
                    [ix * h, (iy + 1) * h],
                ]
            )
            if bool(body.contains(corners).all()):
                chosen.append((ix, iy))
                if len(chosen) == need:
                    break
        if len(chosen) == need:
            break
    if len(chosen) < need:
        raise GeometryError(
            "only %d interior mesh squares; n=%d is too small for this body"
            % (len(chosen), n)
        )
    index = np.array(chosen, dtype=np.int64)
    cell_of = {(int(ix), int(iy)): j for j, (ix, iy) in enumerate(chosen)}
    return GridSquares(n=n, mesh=h, index=index, cell_of=cell_of)


@dataclass
class GridOccupancy:
    """Counts per chosen square plus the remainder; a partition of the sample."""

    squares: GridSquares
    counts: np.ndarray  # (M,) int64
    n_star: int
    payload: list  # per-square arrays of point indices

    def validate(self, n: int) -> None:
        if int(self.counts.sum()) + self.n_star != n:
            raise GeometryError("occupancy does not partition the sample")


def occupancy_from_sample(ps: PointSet, squares: GridSquares) -> GridOccupancy:
    """Exact half-open cell classification of a sample.

    Quantized coordinates are exact dyadic floats, so floor(x / mesh) is a
    deterministic function of the point and classification partitions the
    sample.
    """
    h = squares.mesh
    xy = ps.body_coords()
    ix = np.floor(xy[:, 0] / h).astype(np.int64)
    iy = np.floor(xy[:, 1] / h).astype(np.int64)
    m = squares.m
    counts = np.zeros(m, dtype=np.int64)
    payload_idx = [[] for _ in range(m)]
    n_star = 0
    cell_of = squares.cell_of
    for t in range(len(ps)):
        j = cell_of.get((int(ix[t]), int(iy[t])))
        if j is None:
            n_star += 1
        else:
            counts[j] += 1
            payload_idx[j].append(t)
    occ = GridOccupancy(
        squares=squares,
        counts=counts,
        n_star=n_star,
        payload=[np.array(ii, dtype=np.int64) for ii in payload_idx],
    )
    occ.validate(len(ps))
    return occ


def payload_point_set(ps: PointSet, occ: GridOccupancy, j: int) -> PointSet:
    """The points of one occupied square as a PointSet."""
    idx = occ.payload[j]
    return PointSet(ps.points[idx], ps.scale, validate=False)


@dataclass
class PoissonGridModel:
    """Independent Poisson(1) squares with uniform payloads.

    ``p_star`` is the Poisson(n/2) count of the remainder region (no
    payload).  Payload point sets live on the sampler grid.
    """

    m: int
    mesh: float
    counts: np.ndarray
    p_star: int
    payloads: list  # list[PointSet]


def sample_poisson_grid(m: int, n: int, seed: int, *, trial: int = 0,
                        ensure_general_position: bool = True,
                        with_payloads: bool = True) -> PoissonGridModel:
    """m independent Poisson(1) squares plus the Poisson(n/2) remainder count.

    Conditionally on its count each square holds that many independent
    uniform points.  Payload positions use the canonical square [0, mesh)^2
    with mesh 1/sqrt(n); only within-square geometry matters downstream.
    Count-only consumers can skip payload generation.
    """
    if m < 1:
        raise GeometryError("need at least one square")
    rng = trial_generator(seed, m, trial)
    h = 1.0 / math.sqrt(n)
    counts = rng.poisson(1.0, m).astype(np.int64)
    p_star = int(rng.poisson(n / 2.0))
    payloads = []
    if not with_payloads:
        return PoissonGridModel(m=m, mesh=h, counts=counts, p_star=p_star,
                                payloads=payloads)
    for j in range(m):
        k = int(counts[j])
        pts = np.empty((k, 2), dtype=np.int64)
        seen = set()
        have = 0
        while have < k:
            cand = _quantize(rng.uniform(0.0, h, size=(k - have, 2)))
            for t in range(cand.shape[0]):
                x, y = int(cand[t, 0]), int(cand[t, 1])
                if (x, y) in seen:
                    continue
                if ensure_general_position and have >= 2:
                    if not _kernels.gp_new_point_ok(pts, have, x, y):
                        continue
                pts[have, 0] = x
                pts[have, 1] = y
                seen.add((x, y))
                have += 1
        payloads.append(PointSet(pts, Fraction(GRID_SCALE), validate=False))
    return PoissonGridModel(m=m, mesh=h, counts=counts, p_star=p_star,
                            payloads=payloads)


# ---------------------------------------------------------------------------
# Body description files
# ---------------------------------------------------------------------------

def body_from_dict(spec: dict) -> ConvexBody:
    kind = spec.get("type")
    if kind == "polygon":
        return ConvexBody(kind="polygon", vertices=np.asarray(spec["vertices"], dtype=np.float64))
    if kind == "ellipse":
        return ConvexBody(
            kind="ellipse",
            center=np.asarray(spec.get("center", (0.0, 0.0)), dtype=np.float64),
            semi_axes=tuple(spec["semi_axes"]),
            rotation=float(spec.get("rotation", 0.0)),
        )
    raise GeometryError("body type must be 'polygon' or 'ellipse'")


def body_to_dict(body: ConvexBody) -> dict:
    if body.kind == "polygon":
        return {"type": "polygon", "vertices": body.vertices.tolist()}
    return {
        "type": "ellipse",
        "center": body.center.tolist(),
        "semi_axes": list(body.semi_axes),
        "rotation": body.rotation,
    }
