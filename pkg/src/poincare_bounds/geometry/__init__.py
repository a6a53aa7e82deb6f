from .gap import GapBound, general_gap_bound, koch_gap_bound, pang_constant
from .hypothesis import (
    HypothesisReport,
    NestingReport,
    koch_collar_radius,
    verify_hypothesis_g,
    verify_koch_nesting,
)
from .interpolants import (
    InterpolationPair,
    corner_offset_points,
    epsilon0,
    inner_outer_interpolants,
    quadrilateral_cover,
)
from .koch import koch_inner, koch_outer, koch_polygon
from .lsystem import FractalFamily, family_by_name, gosper, koch_snowflake, lsystem_boundary, quadric
from .polygon import Polygon, contains_points, polygon_contains


def koch_pair(j: int) -> InterpolationPair:
    return InterpolationPair(koch_inner(j), koch_outer(j), j, 0.0)
