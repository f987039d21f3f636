"""Empty-triangle enumeration, pair degrees, and near-pair statistics.

A triangle on three points of X is empty when its closed hull contains no
other point of X.  The optimized enumerator anchors each triangle at its
lexicographically least vertex, sorts the remaining points by angle around
the anchor, and sweeps: a triangle (anchor, i, j) is empty exactly when j's
direction as seen from i is a strict running maximum over the points swept
between them.  An O(n^4) brute-force oracle pins correctness.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import _kernels
from .geom import (
    EXTERIOR,
    FAST_COORD_BOUND,
    GeneralPositionError,
    GeometryError,
    PointSet,
    orientation,
    point_in_triangle,
)

MAX_DEGREE_N = 65535  # dense uint32 pair table cap

ORACLE_CAP = 64


class EngineInvariantError(AssertionError):
    """An internal counting invariant failed; indicates an engine bug."""


def pair_index(i: int, j: int, n: int) -> int:
    """Index of unordered pair (i, j), i < j, in the condensed table."""
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


class EmptyTriangleReport:
    """f(X), the per-pair degree table, and the maximal pair degree.

    ``degrees`` is the condensed upper-triangular uint32 table indexed by
    :func:`pair_index`.  Construction validates the counting invariants:
    the degree sum equals 3 f, every degree is at most n - 2, and f is at
    least n^2 - 5n for n >= 5.
    """

    __slots__ = ("n", "f", "degrees", "deg_max", "argmax_pair")

    def __init__(self, n, f, degrees):
        self.n = int(n)
        self.f = int(f)
        self.degrees = degrees
        self.degrees.setflags(write=False)
        if self.n >= 2:
            best = int(np.argmax(degrees))
            self.deg_max = int(degrees[best])
            self.argmax_pair = _pair_from_index(best, self.n)
        else:
            self.deg_max = 0
            self.argmax_pair = None
        self._validate()

    def _validate(self):
        total = int(self.degrees.sum(dtype=np.int64))
        if total != 3 * self.f:
            raise EngineInvariantError(
                "degree sum %d != 3*f = %d" % (total, 3 * self.f)
            )
        if self.n >= 2 and self.deg_max > self.n - 2:
            raise EngineInvariantError(
                "deg_max %d exceeds n-2 = %d" % (self.deg_max, self.n - 2)
            )
        if self.n >= 5 and self.f < self.n * self.n - 5 * self.n:
            raise EngineInvariantError(
                "f=%d below the n^2-5n floor for n=%d" % (self.f, self.n)
            )

    def degree(self, i: int, j: int) -> int:
        if i == j:
            raise IndexError("pair needs distinct indices")
        if i > j:
            i, j = j, i
        if not (0 <= i < j < self.n):
            raise IndexError("pair index out of range")
        return int(self.degrees[pair_index(i, j, self.n)])

    def degree_histogram(self) -> list[int]:
        """hist[d] = number of unordered pairs with degree d."""
        counts = np.bincount(self.degrees, minlength=self.deg_max + 1)
        return [int(c) for c in counts]

    def same_as(self, other: "EmptyTriangleReport") -> bool:
        return (
            self.n == other.n
            and self.f == other.f
            and self.deg_max == other.deg_max
            and self.argmax_pair == other.argmax_pair
            and np.array_equal(self.degrees, other.degrees)
        )

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "f": self.f,
            "deg_max": self.deg_max,
            "argmax_pair": list(self.argmax_pair) if self.argmax_pair else None,
            "degree_histogram": self.degree_histogram(),
        }


def _pair_from_index(flat: int, n: int):
    # smallest (i, j) attaining the flat index; argmax ties break toward it
    # because np.argmax returns the first maximum and the condensed layout
    # is lexicographic in (i, j).
    i = 0
    row = n - 1
    while flat >= row:
        flat -= row
        i += 1
        row -= 1
    return (i, i + 1 + flat)


def _prepare(ps: PointSet):
    n = len(ps)
    if n < 3:
        raise GeometryError("need at least 3 points")
    if n > MAX_DEGREE_N:
        raise GeometryError("n > %d unsupported by the dense table" % MAX_DEGREE_N)
    order = np.lexsort((ps.points[:, 1], ps.points[:, 0]))
    return ps.points[order], order.astype(np.int64), n


def degree_report(ps: PointSet) -> EmptyTriangleReport:
    """Full report from the optimized enumerator.

    Memory is Theta(n^2) for the pair table.  Raises
    :class:`GeneralPositionError` naming a collinear triple if one exists.
    """
    pts, order, n = _prepare(ps)
    deg = np.zeros(n * (n - 1) // 2, dtype=np.uint32)
    if ps.max_abs_coord() <= FAST_COORD_BOUND:
        f, status, e0, e1, e2 = _kernels.degree_scan(pts, order, n, deg)
        if status == _kernels.COLLINEAR:
            raise GeneralPositionError(sorted((int(e0), int(e1), int(e2))))
    else:
        f = _degree_scan_py(pts, order, n, deg)
    return EmptyTriangleReport(n, f, deg)


def enumerate_empty_triangles(ps: PointSet, consumer=None) -> int:
    """Invoke ``consumer(i, j, k)`` once per empty triangle; return f(X).

    Triples use original point-set indices with i < j < k.  The visit order
    is deterministic (anchor sweep order).
    """
    pts, order, n = _prepare(ps)
    if ps.max_abs_coord() <= FAST_COORD_BOUND:
        buf, status, e0, e1, e2 = _kernels.collect_scan(pts, order, n)
        if status == _kernels.COLLINEAR:
            raise GeneralPositionError(sorted((int(e0), int(e1), int(e2))))
        if consumer is not None:
            for t in range(buf.shape[0]):
                consumer(int(buf[t, 0]), int(buf[t, 1]), int(buf[t, 2]))
        return int(buf.shape[0])
    f = 0

    def count_consumer(i, j, k):
        nonlocal f
        f += 1
        if consumer is not None:
            consumer(i, j, k)

    _scan_py(pts, order, n, count_consumer)
    return f


def _scan_py(pts, order, n, emit):
    """Pure-Python angular record sweep (exact big-int arithmetic)."""
    P = [(int(pts[t, 0]), int(pts[t, 1])) for t in range(n)]
    orig = [int(order[t]) for t in range(n)]
    for a in range(n - 2):
        ax, ay = P[a]
        idx = list(range(a + 1, n))
        dirs = {t: (P[t][0] - ax, P[t][1] - ay) for t in idx}
        idx.sort(key=lambda t: math.atan2(dirs[t][1], dirs[t][0]))
        # exact fix-up of the float pre-sort
        for t in range(1, len(idx)):
            s = t
            while s > 0:
                da = dirs[idx[s - 1]]
                db = dirs[idx[s]]
                if da[0] * db[1] - da[1] * db[0] < 0:
                    idx[s - 1], idx[s] = idx[s], idx[s - 1]
                    s -= 1
                else:
                    break
        for t in range(len(idx) - 1):
            da = dirs[idx[t]]
            db = dirs[idx[t + 1]]
            if da[0] * db[1] - da[1] * db[0] == 0:
                raise GeneralPositionError(
                    sorted((orig[a], orig[idx[t]], orig[idx[t + 1]]))
                )
        m = len(idx)
        for i0 in range(m - 1):
            bi = idx[i0]
            px, py = P[bi]
            maxd = None
            mo = None
            for j0 in range(i0 + 1, m):
                bj = idx[j0]
                dx = P[bj][0] - px
                dy = P[bj][1] - py
                if maxd is not None:
                    cr = maxd[0] * dy - maxd[1] * dx
                    if cr == 0:
                        raise GeneralPositionError(
                            sorted((orig[bi], mo, orig[bj]))
                        )
                    good = cr > 0
                else:
                    good = True
                if good:
                    tri = sorted((orig[a], orig[bi], orig[bj]))
                    emit(tri[0], tri[1], tri[2])
                    maxd = (dx, dy)
                    mo = orig[bj]


def _degree_scan_py(pts, order, n, deg):
    f = 0

    def emit(i, j, k):
        nonlocal f
        f += 1
        deg[pair_index(i, j, n)] += 1
        deg[pair_index(i, k, n)] += 1
        deg[pair_index(j, k, n)] += 1

    _scan_py(pts, order, n, emit)
    return f


def brute_force_empty_triangles(ps: PointSet, cap: int = ORACLE_CAP) -> EmptyTriangleReport:
    """O(n^4) reference oracle, written independently of the sweep.

    Tests every triple for emptiness with the point-in-triangle predicate.
    Capped at ``cap`` points to keep runtime sane.
    """
    n = len(ps)
    if n < 3:
        raise GeometryError("need at least 3 points")
    if n > cap:
        raise GeometryError("oracle cap %d exceeded (n=%d)" % (cap, n))
    pts = [ps.point(i) for i in range(n)]
    deg = np.zeros(n * (n - 1) // 2, dtype=np.uint32)
    f = 0
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                if orientation(pts[i], pts[j], pts[k]) == 0:
                    raise GeneralPositionError((i, j, k))
                empty = True
                for w in range(n):
                    if w == i or w == j or w == k:
                        continue
                    if point_in_triangle(pts[w], pts[i], pts[j], pts[k]) != EXTERIOR:
                        empty = False
                        break
                if empty:
                    f += 1
                    deg[pair_index(i, j, n)] += 1
                    deg[pair_index(i, k, n)] += 1
                    deg[pair_index(j, k, n)] += 1
    return EmptyTriangleReport(n, f, deg)


def pair_degree(ps: PointSet, i: int, j: int) -> int:
    """deg(x_i, x_j; X): single-pair O(n^2) scan."""
    n = len(ps)
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise IndexError("pair needs two distinct valid indices")
    if ps.max_abs_coord() <= FAST_COORD_BOUND:
        cnt = _kernels.pair_degree_scan(ps.points, n, i, j)
        if cnt == -2:
            raise GeneralPositionError((i, j, -1), "collinear triple through the pair")
        return int(cnt)
    pts = [ps.point(t) for t in range(n)]
    cnt = 0
    for z in range(n):
        if z == i or z == j:
            continue
        if orientation(pts[i], pts[j], pts[z]) == 0:
            raise GeneralPositionError((i, j, z))
        empty = True
        for w in range(n):
            if w in (i, j, z):
                continue
            if point_in_triangle(pts[w], pts[i], pts[j], pts[z]) != EXTERIOR:
                empty = False
                break
        if empty:
            cnt += 1
    return cnt


class NearPairStat:
    """Count of unordered pairs within a distance threshold.

    The body-unit threshold T converts to grid units through the point
    set's scale; the squared grid threshold is rounded down to an integer
    and recorded.
    """

    __slots__ = ("t_body", "threshold_sq", "rounded_down", "count", "pair_list")

    def __init__(self, t_body, threshold_sq, rounded_down, count, pair_list=None):
        self.t_body = float(t_body)
        self.threshold_sq = int(threshold_sq)
        self.rounded_down = bool(rounded_down)
        self.count = int(count)
        self.pair_list = pair_list


def threshold_sq_grid(ps: PointSet, t: float) -> tuple[int, bool]:
    """Exact squared grid-unit threshold for a body-unit distance t."""
    t_exact = Fraction(t) * ps.scale
    tsq = t_exact * t_exact
    floor_val = tsq.numerator // tsq.denominator
    return int(floor_val), floor_val != tsq


def near_pairs(ps: PointSet, t: float, collect_pairs: bool = False) -> NearPairStat:
    """N_T(X) via uniform-grid bucketing, expected O(n + count) work."""
    if t <= 0:
        raise GeometryError("threshold must be positive")
    tsq, rounded = threshold_sq_grid(ps, t)
    n = len(ps)
    if n < 2:
        return NearPairStat(t, tsq, rounded, 0, [] if collect_pairs else None)
    if ps.max_abs_coord() <= FAST_COORD_BOUND:
        if collect_pairs:
            buf = _kernels.near_pair_collect(ps.points, n, tsq)
            pairs = sorted((int(buf[t_, 0]), int(buf[t_, 1])) for t_ in range(buf.shape[0]))
            return NearPairStat(t, tsq, rounded, len(pairs), pairs)
        cnt = _kernels.near_pair_count(ps.points, n, tsq)
        return NearPairStat(t, tsq, rounded, cnt, None)
    pairs = []
    cnt = 0
    pts = [ps.point(i) for i in range(n)]
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = pts[j][0] - pts[i][0]
            dy = pts[j][1] - pts[i][1]
            if dx * dx + dy * dy <= tsq:
                cnt += 1
                if collect_pairs:
                    pairs.append((i, j))
    return NearPairStat(t, tsq, rounded, cnt, pairs if collect_pairs else None)


def near_pairs_scan(ps: PointSet, t: float) -> int:
    """O(n^2) all-pairs reference for near_pairs."""
    tsq, _ = threshold_sq_grid(ps, t)
    n = len(ps)
    if n < 2:
        return 0
    if ps.max_abs_coord() <= FAST_COORD_BOUND:
        return int(_kernels.all_pairs_count(ps.points, n, tsq))
    cnt = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = int(ps.points[j, 0]) - int(ps.points[i, 0])
            dy = int(ps.points[j, 1]) - int(ps.points[i, 1])
            if dx * dx + dy * dy <= tsq:
                cnt += 1
    return cnt


def thresholded_degree_sum(ps: PointSet, t: float, report: EmptyTriangleReport | None = None) -> int:
    """Sum of deg(x, y) over pairs with ||x-y|| <= t.

    Empty qualifying set gives 0 (the 0/0 ratio convention).  With a
    precomputed report the degrees come from its table, otherwise each
    qualifying pair is scanned directly; both routes agree.
    """
    stat = near_pairs(ps, t, collect_pairs=True)
    if stat.count == 0:
        return 0
    total = 0
    for (i, j) in stat.pair_list:
        if report is not None:
            total += report.degree(i, j)
        else:
            total += pair_degree(ps, i, j)
    return total
