"""Inner and outer polygons obtained by pushing every corner of a polygon along
its angle bisector, and the side quadrilaterals between them.

For a vertex A with interior angle beta the two offset points are

    A^i = A + eps / sin(beta/2) * u,    A^o = A - eps / sin(beta/2) * u,

with u the unit interior bisector.  Both lie at distance eps from the lines of
the two incident sides, so the quadrilateral (A^i, A^o, B^o, B^i) built on side
AB has two sides parallel to AB at distance eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from ..errors import HypothesisViolation, ParameterError
from .polygon import Polygon, angle_fractions, self_intersections

AREA_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class InterpolationPair:
    inner: Polygon
    outer: Polygon
    level: int
    delta: float = 0.0


def bisectors(S: Polygon) -> tuple[np.ndarray, np.ndarray]:
    """Unit interior bisector and 1/sin(beta/2) at every vertex."""
    w = S.vertices
    d_out = np.roll(w, -1) - w
    d_out = d_out / np.abs(d_out)
    half = 0.5 * S.interior_angles
    return d_out * np.exp(1j * half), 1.0 / np.sin(half)


def _ray_exit(S: Polygon, origins, directions, skip) -> np.ndarray:
    """Distance along each ray to the first boundary edge not listed in `skip`."""
    a, b = S.edges
    e = b - a
    out = np.full(len(origins), np.inf)
    step = max(1, 2_000_000 // len(a))
    for s in range(0, len(origins), step):
        o = origins[s:s + step, None]
        u = directions[s:s + step, None]
        denom = u.real * e.imag - u.imag * e.real
        ao = a - o
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (ao.real * e.imag - ao.imag * e.real) / denom
            r = (ao.real * u.imag - ao.imag * u.real) / denom
        ok = (np.abs(denom) > 1e-15) & (t > 1e-14) & (r >= -1e-12) & (r <= 1 + 1e-12)
        rows = np.arange(s, min(s + step, len(origins)))
        for col in skip:
            ok[np.arange(len(rows)), col[rows]] = False
        t = np.where(ok, t, np.inf)
        out[s:s + step] = t.min(axis=1)
    return out


def epsilon0(S: Polygon) -> float:
    """Largest eps for which every A^i stays inside and every A^o outside S.

    The bisector ray from each corner is followed (inward and outward) to the
    first non-incident edge; the corner offset distance eps/sin(beta/2) must
    stay below that exit distance.
    """
    u, csc = bisectors(S)
    n = S.n
    idx = np.arange(n)
    skip = [idx, (idx - 1) % n]
    t_in = _ray_exit(S, S.vertices, u, skip)
    t_out = _ray_exit(S, S.vertices, -u, skip)
    return float(np.min(np.minimum(t_in, t_out) / csc))


def corner_offset_points(S: Polygon, vertex_index: int, eps: float, eps0: float | None = None):
    """(A^i, A^o) for one corner; raises ParameterError unless 0 < eps < eps0."""
    eps0 = epsilon0(S) if eps0 is None else eps0
    if not 0 < eps < eps0:
        raise ParameterError(f"eps={eps} outside (0, eps0={eps0:.6g})")
    u, csc = bisectors(S)
    k = vertex_index % S.n
    shift = eps * csc[k] * u[k]
    A = S.vertices[k]
    return A + shift, A - shift


def _all_offsets(S: Polygon, eps: float):
    u, csc = bisectors(S)
    shift = eps * csc * u
    return S.vertices + shift, S.vertices - shift


def quadrilateral_cover(S: Polygon, eps: float, check: bool = True) -> np.ndarray:
    """Array (n, 4) of quadrilaterals (A^i, A^o, B^o, B^i), one per side A -> B."""
    if check:
        eps0 = epsilon0(S)
        if not 0 < eps < eps0:
            raise ParameterError(f"eps={eps} outside (0, eps0={eps0:.6g})")
    inner, outer = _all_offsets(S, eps)
    return np.stack([inner, outer, np.roll(outer, -1), np.roll(inner, -1)], axis=1)


def _to_shapely(points) -> ShapelyPolygon:
    return ShapelyPolygon(np.column_stack([points.real, points.imag]))


def cover_overlaps(quads: np.ndarray, scale: float) -> list:
    """Pairs of quadrilaterals whose interiors meet (or that are themselves invalid)."""
    polys = [_to_shapely(q) for q in quads]
    bad = [(k, k) for k, p in enumerate(polys) if not p.is_valid or p.area <= 0]
    if bad:
        return bad
    tree = shapely.STRtree(polys)
    left, right = tree.query(polys, predicate="intersects")
    tol = AREA_TOL * scale**2
    for i, j in zip(left.tolist(), right.tolist()):
        if i < j and polys[i].intersection(polys[j]).area > tol:
            bad.append((i, j))
    return bad


def inner_outer_interpolants(Sigma: Polygon, delta: float) -> InterpolationPair:
    """T_j and H_j from the corner offsets at eps = delta * l_j.

    Checks (G1) disjointness of the side quadrilaterals and then (G2) that both
    offset polygons are Jordan, raising HypothesisViolation naming the failed
    condition.
    """
    if Sigma.side_length is None:
        raise ParameterError("interpolants need a polygon with equal sides")
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    eps = delta * Sigma.side_length
    quads = quadrilateral_cover(Sigma, eps, check=False)
    bad = cover_overlaps(quads, Sigma.side_length)
    if bad:
        raise HypothesisViolation(
            "G1", f"side quadrilaterals {bad[0]} overlap at delta={delta} (level {Sigma.level})"
        )
    inner_w, outer_w = quads[:, 0], quads[:, 1]
    for label, w in (("inner", inner_w), ("outer", outer_w)):
        poly = Polygon(w, angle_fractions(w), Sigma.level, None)
        if poly.area <= 0 or self_intersections(poly):
            raise HypothesisViolation("G2", f"{label} polygon is not a Jordan polygon at delta={delta}")
    eps0 = epsilon0(Sigma)
    if eps >= eps0:
        raise ParameterError(f"delta*l_j={eps} is not below eps0={eps0:.6g}")
    inner = Polygon.from_vertices(inner_w, level=Sigma.level, name=f"T{Sigma.level}", check=False)
    outer = Polygon.from_vertices(outer_w, level=Sigma.level, name=f"H{Sigma.level}", check=False)
    return InterpolationPair(inner, outer, Sigma.level, float(delta))
