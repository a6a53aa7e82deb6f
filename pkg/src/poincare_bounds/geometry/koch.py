"""Inner (T_j) and outer (H_j) Koch snowflake polygons.

T_0 is the equilateral triangle inscribed in the unit circle and T_j grows a
triangle outward on the middle third of every side.  H_0 is the circumscribing
regular hexagon of side 1 and H_j cuts a triangle inward from every side.  Both
start at the vertex e^{i pi/2}, so the corners of T_0 (H_0) keep the vertex
indices 0, n/3, 2n/3 (multiples of n/6) at every level.
"""

from __future__ import annotations

import numpy as np

from ..errors import SizeError
from .polygon import Polygon, regular_polygon

MAX_LEVEL = 12
_ROT = np.exp(1j * np.pi / 3)


def _check_level(j: int):
    if j < 0:
        raise SizeError(f"level must be nonnegative, got {j}")
    if j > MAX_LEVEL:
        raise SizeError(f"level {j} exceeds the supported maximum {MAX_LEVEL}")


def _koch_step(w: np.ndarray, outward: bool) -> np.ndarray:
    d = np.roll(w, -1) - w
    third = d / 3
    apex_dir = np.conj(_ROT) if outward else _ROT
    pts = np.stack([w, w + third, w + third + third * apex_dir, w + 2 * third], axis=1)
    return pts.ravel()


def koch_inner(j: int) -> Polygon:
    """T_j with 3*4^j vertices and side sqrt(3)/3^j."""
    _check_level(j)
    w = regular_polygon(3)
    for _ in range(j):
        w = _koch_step(w, outward=True)
    return Polygon.from_vertices(w, level=j, side_length=np.sqrt(3) / 3**j, name=f"T{j}")


def koch_outer(j: int) -> Polygon:
    """H_j with 6*4^j vertices and side 1/3^j."""
    _check_level(j)
    w = regular_polygon(6)
    for _ in range(j):
        w = _koch_step(w, outward=False)
    return Polygon.from_vertices(w, level=j, side_length=1.0 / 3**j, name=f"H{j}")


def koch_polygon(kind: str, j: int) -> Polygon:
    if kind.upper() == "T":
        return koch_inner(j)
    if kind.upper() == "H":
        return koch_outer(j)
    raise ValueError(f"unknown Koch polygon kind {kind!r}")


def symmetry_order(kind: str) -> int:
    return 3 if kind.upper() == "T" else 6
