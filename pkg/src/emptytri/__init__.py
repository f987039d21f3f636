"""Empty-triangle statistics of planar point sets.

Exact integer geometry, an output-anchored empty-triangle enumerator with a
brute-force oracle, convex-body samplers with a mesh grid and Poissonized
counterpart, order-type labels, and a seeded Monte Carlo experiment harness.
"""

__version__ = "0.1.0"

from .geom import (
    AffineMap,
    GeneralPositionError,
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
from .engine import (
    EmptyTriangleReport,
    NearPairStat,
    brute_force_empty_triangles,
    degree_report,
    enumerate_empty_triangles,
    near_pairs,
    pair_degree,
    thresholded_degree_sum,
)

__all__ = [
    "__version__",
    "AffineMap",
    "GeneralPositionError",
    "GeometryError",
    "PointSet",
    "apply_affine",
    "is_general_position",
    "orientation",
    "point_in_triangle",
    "read_point_set",
    "squared_distance",
    "write_point_set",
    "EmptyTriangleReport",
    "NearPairStat",
    "brute_force_empty_triangles",
    "degree_report",
    "enumerate_empty_triangles",
    "near_pairs",
    "pair_degree",
    "thresholded_degree_sum",
]
