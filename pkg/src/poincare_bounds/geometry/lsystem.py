"""Prefractal polygons Sigma_j from an edge-rewriting rule.

Every edge of Sigma_{j-1} is replaced by a scaled and rotated copy of the
generator path, whose endpoints coincide with the edge endpoints.  The
generator is written in turtle notation: 'F' draws one unit step, '+' turns
toward the exterior of the counterclockwise boundary (clockwise) by `angle`,
'-' turns toward the interior.  With this convention "F+F--F+F" at 60 degrees
produces the Koch snowflake and "F-F++F-F" the Cesaro antisnowflake.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, GeometryError, SizeError
from .polygon import Polygon, regular_polygon

MAX_EDGES = 2_000_000


def generator_path(rule: str, angle_deg: float) -> np.ndarray:
    """Turtle path of the rule normalised to run from 0 to 1."""
    heading = 1.0 + 0j
    turn = np.exp(1j * np.deg2rad(angle_deg))
    pts = [0j]
    for ch in rule:
        if ch == "F":
            pts.append(pts[-1] + heading)
        elif ch == "+":
            heading /= turn
        elif ch == "-":
            heading *= turn
        elif ch.isspace():
            continue
        else:
            raise ConfigError(f"unexpected symbol {ch!r} in generator {rule!r}")
    pts = np.array(pts)
    end = pts[-1]
    if abs(end) < 1e-12:
        raise ConfigError(f"generator {rule!r} returns to its start point")
    return pts / end


@dataclass(frozen=True, eq=False)
class FractalFamily:
    name: str
    base: Polygon
    generator: str
    angle_deg: float
    max_angle_bound: float
    symmetry: int = 1

    @property
    def path(self) -> np.ndarray:
        return generator_path(self.generator, self.angle_deg)

    @property
    def ratio(self) -> float:
        """Length of one generator step relative to the replaced edge."""
        p = self.path
        return float(abs(p[1] - p[0]))

    @property
    def segments(self) -> int:
        return self.generator.count("F")

    def side_length(self, j: int) -> float:
        return float(self.base.edge_lengths[0] * self.ratio**j)


def _substitute(w: np.ndarray, path: np.ndarray) -> np.ndarray:
    d = np.roll(w, -1) - w
    pts = w[:, None] + d[:, None] * path[None, :-1]
    return pts.ravel()


def lsystem_boundary(family: FractalFamily, j: int, check: bool = True) -> Polygon:
    if j < 0:
        raise SizeError(f"level must be nonnegative, got {j}")
    n_edges = family.base.n * family.segments**j
    if n_edges > MAX_EDGES:
        raise SizeError(f"level {j} of {family.name} would have {n_edges} edges")
    path = family.path
    w = family.base.vertices
    for _ in range(j):
        w = _substitute(w, path)
    try:
        return Polygon.from_vertices(
            w, level=j, side_length=family.side_length(j), name=f"{family.name}{j}", check=check
        )
    except GeometryError as exc:
        raise GeometryError(f"{family.name} level {j}: {exc}") from exc


def _square() -> Polygon:
    w = np.array([0, 1, 1 + 1j, 1j], dtype=complex)
    return Polygon.from_vertices(w, side_length=1.0, name="square")


def _hexagon() -> Polygon:
    return Polygon.from_vertices(regular_polygon(6), side_length=1.0, name="hexagon")


def _triangle() -> Polygon:
    return Polygon.from_vertices(regular_polygon(3), side_length=np.sqrt(3), name="triangle")


def quadric() -> FractalFamily:
    return FractalFamily("quadric", _square(), "F+F-F-FF+F+F-F", 90.0, 1.5 * np.pi, symmetry=4)


def gosper() -> FractalFamily:
    """Right-angled island on the hexagon with step ratio 1/sqrt(5).

    The generator is the point-symmetric lattice path right-up-right from
    (0, 0) to (2, 1).  Its first and last steps are parallel, so the hexagon's
    2pi/3 corners survive at every level, and its bend sits at distance
    l_j/5 from the replaced edge.
    """
    return FractalFamily("gosper", _hexagon(), "F-F+F", 90.0, 1.5 * np.pi, symmetry=6)


def koch_snowflake(angle_deg: float = 60.0) -> FractalFamily:
    """Koch curve on the equilateral triangle; `angle_deg` != 60 gives the
    generalised (Cesaro type) snowflake with generator F+F--F+F."""
    if not 0 < angle_deg < 90:
        raise ConfigError("Koch angle must lie in (0, 90) degrees")
    name = "koch" if angle_deg == 60.0 else f"koch-general({angle_deg:g})"
    beta0 = np.pi + 2 * np.deg2rad(angle_deg)
    return FractalFamily(name, _triangle(), "F+F--F+F", angle_deg, beta0, symmetry=3)


def cesaro(angle_deg: float = 60.0) -> FractalFamily:
    beta0 = np.pi + 2 * np.deg2rad(angle_deg)
    return FractalFamily(f"cesaro({angle_deg:g})", _triangle(), "F-F++F-F", angle_deg, beta0, symmetry=3)


def family_by_name(name: str, **kwargs) -> FractalFamily:
    key = name.lower()
    if key == "quadric":
        return quadric()
    if key == "gosper":
        return gosper()
    if key == "koch":
        return koch_snowflake()
    if key.startswith("koch-general"):
        return koch_snowflake(kwargs.get("angle_deg", 60.0))
    if key.startswith("cesaro"):
        return cesaro(kwargs.get("angle_deg", 60.0))
    raise ConfigError(f"unknown fractal family {name!r}")
