import numpy as np
import pytest

from emptytri.geom import PointSet, is_general_position


def random_gp_set(rng, n, box=10**6) -> PointSet:
    """Random general-position integer point set (rejection on collinear)."""
    while True:
        pts = rng.integers(0, box, size=(n, 2))
        if len({(int(x), int(y)) for x, y in pts}) < n:
            continue
        ps = PointSet(pts)
        ok, _ = is_general_position(ps)
        if ok:
            return ps


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
