"""Chirotopes, canonical order-type labels, and in-square type search.

Two general-position sets are of the same type when some relabeling makes
all triple orientations agree.  The canonical label is the lexicographically
least orientation vector over all relabelings; mirror images are distinct
types unless a relabeling equates them.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

from .bodies import GridSquares, GridOccupancy, occupancy_from_sample, payload_point_set
from .geom import GeneralPositionError, GeometryError, PointSet, orientation

CANONICAL_CAP = 9  # k! relabeling search cap


@dataclass(frozen=True)
class Chirotope:
    """Orientation signs of all index triples h < i < j, in lex order."""

    k: int
    signs: tuple

    def sign(self, h: int, i: int, j: int) -> int:
        trip = tuple(sorted((h, i, j)))
        pos = _triple_position(trip, self.k)
        return self.signs[pos]


def _triple_position(trip, k):
    pos = 0
    for t in combinations(range(k), 3):
        if t == trip:
            return pos
        pos += 1
    raise IndexError("triple out of range")


def chirotope(ps: PointSet) -> Chirotope:
    k = len(ps)
    if k < 3:
        raise GeometryError("chirotope needs at least 3 points")
    pts = [ps.point(i) for i in range(k)]
    signs = []
    for (h, i, j) in combinations(range(k), 3):
        s = orientation(pts[h], pts[i], pts[j])
        if s == 0:
            raise GeneralPositionError((h, i, j))
        signs.append(s)
    return Chirotope(k=k, signs=tuple(signs))


@dataclass(frozen=True)
class OrderTypeLabel:
    """Canonical representative: lexicographically least sign vector."""

    k: int
    signs: tuple

    def serialize(self) -> str:
        return "%d:%s" % (self.k, "".join("+" if s > 0 else "-" for s in self.signs))

    @staticmethod
    def parse(text: str) -> "OrderTypeLabel":
        try:
            head, body = text.split(":", 1)
            k = int(head)
        except ValueError:
            raise GeometryError("bad order-type label %r" % text)
        want = len(list(combinations(range(k), 3)))
        if len(body) != want or any(ch not in "+-" for ch in body):
            raise GeometryError("bad order-type label %r" % text)
        return OrderTypeLabel(k=k, signs=tuple(1 if ch == "+" else -1 for ch in body))


def _relabeled_sign(sign_of, perm, h, i, j):
    """Orientation of new triple (h,i,j) after relabeling t -> perm[t]."""
    a, b, c = perm[h], perm[i], perm[j]
    # sort (a, b, c) and track the swap parity
    par = 1
    if a > b:
        a, b = b, a
        par = -par
    if b > c:
        b, c = c, b
        par = -par
    if a > b:
        a, b = b, a
        par = -par
    return sign_of[(a, b, c)] * par


def canonical_label(ps: PointSet) -> OrderTypeLabel:
    """Minimum sign vector over all k! relabelings (k <= 9)."""
    k = len(ps)
    if k > CANONICAL_CAP:
        raise GeometryError("canonical label capped at k <= %d" % CANONICAL_CAP)
    chi = chirotope(ps)
    triples = list(combinations(range(k), 3))
    sign_of = dict(zip(triples, chi.signs))
    best = None
    for perm in permutations(range(k)):
        if best is None:
            best = [_relabeled_sign(sign_of, perm, h, i, j) for h, i, j in triples]
            continue
        for idx, (h, i, j) in enumerate(triples):
            s = _relabeled_sign(sign_of, perm, h, i, j)
            if s != best[idx]:
                if s < best[idx]:
                    best = best[:idx] + [s] + [
                        _relabeled_sign(sign_of, perm, h2, i2, j2)
                        for h2, i2, j2 in triples[idx + 1:]
                    ]
                break
    return OrderTypeLabel(k=k, signs=tuple(best))


def same_type(a: PointSet, b: PointSet) -> bool:
    """True iff the sets have equal canonical labels.

    A size mismatch is not the same type by definition and returns False.
    """
    if len(a) != len(b):
        return False
    return canonical_label(a) == canonical_label(b)


def is_convex_position(ps: PointSet) -> bool:
    """True iff every point is a vertex of the convex hull (exact)."""
    n = len(ps)
    if n < 3:
        return True
    pts = sorted(ps)
    hull_size = 0
    for half in range(2):
        chain = []
        seq = pts if half == 0 else pts[::-1]
        for p in seq:
            while len(chain) >= 2 and orientation(chain[-2], chain[-1], p) <= 0:
                if orientation(chain[-2], chain[-1], p) == 0:
                    return False
                chain.pop()
            chain.append(p)
        hull_size += len(chain) - 1
    return hull_size == n


def find_type_in_squares(ps: PointSet, squares: GridSquares, label: OrderTypeLabel):
    """Index of the first square whose payload realizes the label, else None."""
    occ = occupancy_from_sample(ps, squares)
    return find_type_in_occupancy(ps, occ, label)


def find_type_in_occupancy(ps: PointSet, occ: GridOccupancy, label: OrderTypeLabel):
    k = label.k
    for j in range(occ.squares.m):
        if int(occ.counts[j]) != k:
            continue
        payload = payload_point_set(ps, occ, j)
        if canonical_label(payload) == label:
            return j
    return None


def convex_position_points(k: int) -> PointSet:
    """k integer points in convex position (on a parabola, never collinear)."""
    return PointSet([(i, i * i) for i in range(k)])


def convex_position_label(k: int) -> OrderTypeLabel:
    """Canonical label of the k-point convex position type."""
    return canonical_label(convex_position_points(k))
