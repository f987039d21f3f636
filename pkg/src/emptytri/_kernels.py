"""Compiled inner loops (numba).

All kernels require coordinates with |x|,|y| <= 2^30 - 1 so that cross
products and squared distances of coordinate differences stay inside int64.
Callers check the bound and fall back to exact Python code above it.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

# Status codes returned by the scan kernels.
OK = 0
COLLINEAR = 1


@njit(cache=True)
def _sort_star(dirs, ang, order, m):
    """Exact angular order of m direction vectors spanning < 180 degrees.

    Float pre-sort followed by an exact insertion fix-up.  Returns the index
    of an equal-direction adjacency (collinear pair) or -1 if all distinct.
    """
    for t in range(m):
        ang[t] = math.atan2(dirs[t, 1], dirs[t, 0])
    order[:m] = np.argsort(ang[:m])
    for t in range(1, m):
        s = t
        while s > 0:
            a = order[s - 1]
            b = order[s]
            cr = dirs[a, 0] * dirs[b, 1] - dirs[a, 1] * dirs[b, 0]
            if cr < 0:
                order[s - 1] = b
                order[s] = a
                s -= 1
            else:
                break
    for t in range(m - 1):
        a = order[t]
        b = order[t + 1]
        cr = dirs[a, 0] * dirs[b, 1] - dirs[a, 1] * dirs[b, 0]
        if cr == 0:
            return t
    return -1


@njit(cache=True)
def degree_scan(pts, orig, n, deg):
    """Count empty triangles and fill the condensed pair-degree table.

    ``pts`` is lexicographically sorted, ``orig`` maps sorted positions to
    original indices, ``deg`` is a zeroed uint32 array of length n(n-1)/2
    indexed by original unordered pairs.  Each empty triangle is anchored at
    its lex-least vertex; within an anchor's star the remaining points are
    swept in angular order and a triangle (anchor, i, j) is empty exactly
    when j's direction seen from i is a running maximum.

    Returns (f, status, e0, e1, e2); on COLLINEAR the e* are the original
    indices of a collinear triple.
    """
    f = 0
    dirs = np.empty((n, 2), np.int64)
    ang = np.empty(n, np.float64)
    order = np.empty(n, np.int64)
    for a in range(n - 2):
        m = n - 1 - a
        ax = pts[a, 0]
        ay = pts[a, 1]
        for t in range(m):
            dirs[t, 0] = pts[a + 1 + t, 0] - ax
            dirs[t, 1] = pts[a + 1 + t, 1] - ay
        bad = _sort_star(dirs, ang, order, m)
        if bad >= 0:
            return f, COLLINEAR, orig[a], orig[a + 1 + order[bad]], orig[a + 1 + order[bad + 1]]
        oa = orig[a]
        for i0 in range(m - 1):
            pi = order[i0]
            px = pts[a + 1 + pi, 0]
            py = pts[a + 1 + pi, 1]
            oi = orig[a + 1 + pi]
            mdx = np.int64(0)
            mdy = np.int64(0)
            mo = oi
            have = False
            for j0 in range(i0 + 1, m):
                pj = order[j0]
                dx = pts[a + 1 + pj, 0] - px
                dy = pts[a + 1 + pj, 1] - py
                if have:
                    cr = mdx * dy - mdy * dx
                    if cr == 0:
                        return f, COLLINEAR, oi, mo, orig[a + 1 + pj]
                    good = cr > 0
                else:
                    good = True
                if good:
                    oj = orig[a + 1 + pj]
                    f += 1
                    u, v = (oa, oi) if oa < oi else (oi, oa)
                    deg[u * (2 * n - u - 1) // 2 + (v - u - 1)] += 1
                    u, v = (oa, oj) if oa < oj else (oj, oa)
                    deg[u * (2 * n - u - 1) // 2 + (v - u - 1)] += 1
                    u, v = (oi, oj) if oi < oj else (oj, oi)
                    deg[u * (2 * n - u - 1) // 2 + (v - u - 1)] += 1
                    mdx = dx
                    mdy = dy
                    mo = oj
                    have = True
    return f, OK, np.int64(-1), np.int64(-1), np.int64(-1)


@njit(cache=True)
def collect_scan(pts, orig, n):
    """Like degree_scan but collects the empty triangles as index triples."""
    cap = 1024
    buf = np.empty((cap, 3), np.int64)
    f = 0
    dirs = np.empty((n, 2), np.int64)
    ang = np.empty(n, np.float64)
    order = np.empty(n, np.int64)
    for a in range(n - 2):
        m = n - 1 - a
        ax = pts[a, 0]
        ay = pts[a, 1]
        for t in range(m):
            dirs[t, 0] = pts[a + 1 + t, 0] - ax
            dirs[t, 1] = pts[a + 1 + t, 1] - ay
        bad = _sort_star(dirs, ang, order, m)
        if bad >= 0:
            return buf[:f], COLLINEAR, orig[a], orig[a + 1 + order[bad]], orig[a + 1 + order[bad + 1]]
        oa = orig[a]
        for i0 in range(m - 1):
            pi = order[i0]
            px = pts[a + 1 + pi, 0]
            py = pts[a + 1 + pi, 1]
            oi = orig[a + 1 + pi]
            mdx = np.int64(0)
            mdy = np.int64(0)
            mo = oi
            have = False
            for j0 in range(i0 + 1, m):
                pj = order[j0]
                dx = pts[a + 1 + pj, 0] - px
                dy = pts[a + 1 + pj, 1] - py
                if have:
                    cr = mdx * dy - mdy * dx
                    if cr == 0:
                        return buf[:f], COLLINEAR, oi, mo, orig[a + 1 + pj]
                    good = cr > 0
                else:
                    good = True
                if good:
                    oj = orig[a + 1 + pj]
                    if f == cap:
                        cap *= 2
                        nbuf = np.empty((cap, 3), np.int64)
                        nbuf[:f] = buf
                        buf = nbuf
                    i1, i2, i3 = oa, oi, oj
                    if i1 > i2:
                        i1, i2 = i2, i1
                    if i2 > i3:
                        i2, i3 = i3, i2
                    if i1 > i2:
                        i1, i2 = i2, i1
                    buf[f, 0] = i1
                    buf[f, 1] = i2
                    buf[f, 2] = i3
                    f += 1
                    mdx = dx
                    mdy = dy
                    mo = oj
                    have = True
    return buf[:f], OK, np.int64(-1), np.int64(-1), np.int64(-1)


@njit(cache=True)
def pair_degree_scan(pts, n, i, j):
    """Degree of pair (i, j): z-count with conv{i,j,z} empty. -2 on collinear."""
    ix = pts[i, 0]
    iy = pts[i, 1]
    jx = pts[j, 0]
    jy = pts[j, 1]
    cnt = 0
    for z in range(n):
        if z == i or z == j:
            continue
        zx = pts[z, 0]
        zy = pts[z, 1]
        s = (jx - ix) * (zy - iy) - (jy - iy) * (zx - ix)
        if s == 0:
            return -2
        sgn = np.int64(1) if s > 0 else np.int64(-1)
        empty = True
        for w in range(n):
            if w == i or w == j or w == z:
                continue
            wx = pts[w, 0]
            wy = pts[w, 1]
            s1 = ((jx - ix) * (wy - iy) - (jy - iy) * (wx - ix)) * sgn
            if s1 < 0:
                continue
            s2 = ((zx - jx) * (wy - jy) - (zy - jy) * (wx - jx)) * sgn
            if s2 < 0:
                continue
            s3 = ((ix - zx) * (wy - zy) - (iy - zy) * (wx - zx)) * sgn
            if s3 < 0:
                continue
            empty = False
            break
        if empty:
            cnt += 1
    return cnt


@njit(cache=True)
def near_pair_count(pts, n, tsq):
    """Count unordered pairs with squared distance <= tsq via grid buckets."""
    if n < 2:
        return 0
    cell = np.int64(math.sqrt(float(tsq))) + 2
    off = np.int64(1) << 30
    keys = np.empty(n, np.int64)
    for i in range(n):
        kx = pts[i, 0] // cell
        ky = pts[i, 1] // cell
        keys[i] = ((kx + off) << 31) | (ky + off)
    sidx = np.argsort(keys)
    skeys = keys[sidx]
    count = 0
    for s in range(n):
        i = sidx[s]
        kx = pts[i, 0] // cell
        ky = pts[i, 1] // cell
        for ddx in range(-1, 2):
            for ddy in range(-1, 2):
                key = ((kx + ddx + off) << 31) | (ky + ddy + off)
                lo = np.searchsorted(skeys, key, side="left")
                hi = np.searchsorted(skeys, key, side="right")
                for t in range(lo, hi):
                    if t <= s:
                        continue
                    j = sidx[t]
                    dx = pts[j, 0] - pts[i, 0]
                    dy = pts[j, 1] - pts[i, 1]
                    if dx * dx + dy * dy <= tsq:
                        count += 1
    return count


@njit(cache=True)
def near_pair_collect(pts, n, tsq):
    """Same as near_pair_count but returns the qualifying index pairs."""
    cap = 64
    buf = np.empty((cap, 2), np.int64)
    cnt = 0
    if n < 2:
        return buf[:0]
    cell = np.int64(math.sqrt(float(tsq))) + 2
    off = np.int64(1) << 30
    keys = np.empty(n, np.int64)
    for i in range(n):
        kx = pts[i, 0] // cell
        ky = pts[i, 1] // cell
        keys[i] = ((kx + off) << 31) | (ky + off)
    sidx = np.argsort(keys)
    skeys = keys[sidx]
    for s in range(n):
        i = sidx[s]
        kx = pts[i, 0] // cell
        ky = pts[i, 1] // cell
        for ddx in range(-1, 2):
            for ddy in range(-1, 2):
                key = ((kx + ddx + off) << 31) | (ky + ddy + off)
                lo = np.searchsorted(skeys, key, side="left")
                hi = np.searchsorted(skeys, key, side="right")
                for t in range(lo, hi):
                    if t <= s:
                        continue
                    j = sidx[t]
                    dx = pts[j, 0] - pts[i, 0]
                    dy = pts[j, 1] - pts[i, 1]
                    if dx * dx + dy * dy <= tsq:
                        if cnt == cap:
                            cap *= 2
                            nbuf = np.empty((cap, 2), np.int64)
                            nbuf[:cnt] = buf
                            buf = nbuf
                        a, b = (i, j) if i < j else (j, i)
                        buf[cnt, 0] = a
                        buf[cnt, 1] = b
                        cnt += 1
    return buf[:cnt]


@njit(cache=True)
def all_pairs_count(pts, n, tsq):
    """O(n^2) reference for near_pair_count."""
    count = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = pts[j, 0] - pts[i, 0]
            dy = pts[j, 1] - pts[i, 1]
            if dx * dx + dy * dy <= tsq:
                count += 1
    return count


@njit(cache=True)
def gp_brute(pts, n):
    """First collinear triple in lex order, or (-1, -1, -1)."""
    for i in range(n - 2):
        ix = pts[i, 0]
        iy = pts[i, 1]
        for j in range(i + 1, n - 1):
            dx1 = pts[j, 0] - ix
            dy1 = pts[j, 1] - iy
            for k in range(j + 1, n):
                if dx1 * (pts[k, 1] - iy) - dy1 * (pts[k, 0] - ix) == 0:
                    return i, j, k
    return -1, -1, -1


_ANG_TOL = 1e-9  # float prefilter window; exact parallels differ by ~1e-15


@njit(cache=True)
def gp_new_point_ok(pts, k, x, y):
    """True iff (x, y) duplicates nothing and makes no collinear triple
    with any two of pts[:k].

    Directions from the candidate are pre-sorted by float angle mod pi;
    only near-ties get the exact integer cross-product test, so every
    decision is exact while the common case stays O(k log k).
    """
    if k < 1:
        return True
    dxs = np.empty(k, np.int64)
    dys = np.empty(k, np.int64)
    ang = np.empty(k, np.float64)
    for t in range(k):
        dx = pts[t, 0] - x
        dy = pts[t, 1] - y
        if dx == 0 and dy == 0:
            return False
        a = math.atan2(dy, dx)
        if a < 0.0:
            a += math.pi
        if a >= math.pi:
            a -= math.pi
        dxs[t] = dx
        dys[t] = dy
        ang[t] = a
    order = np.argsort(ang)
    for t in range(k - 1):
        at = ang[order[t]]
        u = t + 1
        while u < k and ang[order[u]] - at < _ANG_TOL:
            i = order[t]
            j = order[u]
            if dxs[i] * dys[j] - dys[i] * dxs[j] == 0:
                return False
            u += 1
    # wraparound: angles just below pi pair with angles just above 0
    hi = math.pi - 2.0 * _ANG_TOL
    for t in range(k - 1, -1, -1):
        if ang[order[t]] <= hi:
            break
        for u in range(k):
            if ang[order[u]] >= 2.0 * _ANG_TOL:
                break
            i = order[t]
            j = order[u]
            if i != j and dxs[i] * dys[j] - dys[i] * dxs[j] == 0:
                return False
    return True


@njit(cache=True)
def gp_point_against(pts, n, skip, x, y):
    """True iff (x, y) is collinear with no pair of pts excluding index skip."""
    for b in range(n - 1):
        if b == skip:
            continue
        dx1 = pts[b, 0] - x
        dy1 = pts[b, 1] - y
        if dx1 == 0 and dy1 == 0:
            return False
        for c in range(b + 1, n):
            if c == skip:
                continue
            if dx1 * (pts[c, 1] - y) - dy1 * (pts[c, 0] - x) == 0:
                return False
    return True
