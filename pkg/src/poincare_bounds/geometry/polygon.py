"""Polygon value type and the planar predicates used throughout the package.

Vertices are stored as a complex array, counterclockwise, without repeating
the first vertex.  Predicates work in floating point with a tolerance scaled by
the polygon diameter; coordinates that are exactly representable (dyadic grids
such as the quadric island) are classified exactly because the orientation
determinant is then computed without rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import GeometryError

REL_TOL = 1e-12


def _as_complex(points) -> np.ndarray:
    arr = np.asarray(points)
    if np.iscomplexobj(arr):
        return arr.astype(complex).ravel()
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    return arr.astype(complex).ravel()


def angle_fractions(vertices: np.ndarray) -> np.ndarray:
    """Interior angle at every vertex divided by pi (counterclockwise input)."""
    w = np.asarray(vertices, dtype=complex)
    d_in = w - np.roll(w, 1)
    d_out = np.roll(w, -1) - w
    turn = np.angle(d_out / d_in)
    return 1.0 - turn / np.pi


def signed_area(vertices: np.ndarray) -> float:
    w = np.asarray(vertices, dtype=complex)
    nxt = np.roll(w, -1)
    return 0.5 * float(np.sum(w.real * nxt.imag - nxt.real * w.imag))


@dataclass(frozen=True, eq=False)
class Polygon:
    vertices: np.ndarray
    angle_fractions: np.ndarray
    level: int = 0
    side_length: Optional[float] = None
    name: str = field(default="", compare=False)

    @classmethod
    def from_vertices(cls, vertices, level=0, side_length=None, name="", check=True):
        w = _as_complex(vertices)
        if len(w) < 3:
            raise GeometryError("a polygon needs at least three vertices")
        if signed_area(w) < 0:
            w = w[::-1].copy()
        alpha = angle_fractions(w)
        poly = cls(w, alpha, level, side_length, name)
        if check:
            poly.check_invariants()
        return poly

    # -- basic measurements -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices, np.roll(self.vertices, -1)

    @property
    def edge_lengths(self) -> np.ndarray:
        a, b = self.edges
        return np.abs(b - a)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    @property
    def diameter(self) -> float:
        w = self.vertices
        return float(np.max(np.abs(w[:, None] - w[None, :]))) if self.n < 4000 else float(
            2 * np.max(np.abs(w - w.mean()))
        )

    @property
    def interior_angles(self) -> np.ndarray:
        return np.pi * self.angle_fractions

    @property
    def max_angle(self) -> float:
        """beta_m: largest inner or outer angle over all vertices."""
        beta = self.interior_angles
        return float(np.max(np.maximum(beta, 2 * np.pi - beta)))

    def inradius(self, samples: int = 200) -> float:
        """Largest distance from an interior point to the boundary (grid search + polish)."""
        from scipy.optimize import minimize

        w = self.vertices
        xs = np.linspace(w.real.min(), w.real.max(), samples)
        ys = np.linspace(w.imag.min(), w.imag.max(), samples)
        X, Y = np.meshgrid(xs, ys)
        pts = (X + 1j * Y).ravel()
        pts = pts[contains_points(self, pts)]
        d = boundary_distance(self, pts)
        start = pts[np.argmax(d)]

        def neg(x):
            z = complex(x[0], x[1])
            return -boundary_distance(self, np.array([z]))[0]

        res = minimize(neg, [start.real, start.imag], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14})
        return float(max(-res.fun, d.max()))

    # -- invariants -----------------------------------------------------------
    def check_invariants(self):
        closure = np.sum(1.0 - self.angle_fractions)
        if abs(closure - 2.0) > 1e-9:
            raise GeometryError(f"angle fractions do not close the polygon (sum={closure})")
        if np.any(self.angle_fractions <= 0) or np.any(self.angle_fractions >= 2):
            raise GeometryError("angle fractions must lie in (0, 2)")
        if self.side_length is not None:
            rel = np.abs(self.edge_lengths - self.side_length) / self.side_length
            if rel.max() > 1e-12:
                raise GeometryError(f"edge lengths deviate from side_length by {rel.max():.2e}")
        crossings = self_intersections(self)
        if crossings:
            raise GeometryError(f"boundary is not a Jordan curve; first crossing edges {crossings[0]}")

    # -- serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": [[float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")] for z in self.vertices],
            "angle_fractions": [float(f"{a:.17g}") for a in self.angle_fractions],
            "level": int(self.level),
            "side_length": None if self.side_length is None else float(f"{self.side_length:.17g}"),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Polygon":
        w = _as_complex(np.array(data["vertices"], dtype=float))
        alpha = np.array(data["angle_fractions"], dtype=float)
        return cls(w, alpha, int(data.get("level", 0)), data.get("side_length"))

    @classmethod
    def from_json(cls, text: str) -> "Polygon":
        return cls.from_dict(json.loads(text))

    def translated_vertex(self, index: int, shift: complex) -> "Polygon":
        w = self.vertices.copy()
        w[index] += shift
        return Polygon(w, angle_fractions(w), self.level, None, self.name)


# ----------------------------------------------------------------------------
# predicates


def orient(a, b, c):
    """Twice the signed area of (a, b, c); positive for a left turn."""
    return (b.real - a.real) * (c.imag - a.imag) - (b.imag - a.imag) * (c.real - a.real)


def _tol(poly: Polygon) -> float:
    w = poly.vertices
    scale = max(np.ptp(w.real), np.ptp(w.imag))
    return REL_TOL * scale


def on_boundary(poly: Polygon, points, tol=None) -> np.ndarray:
    return boundary_distance(poly, points) <= (_tol(poly) if tol is None else tol)


def boundary_distance(poly: Polygon, points, chunk: int = 2_000_000) -> np.ndarray:
    """Euclidean distance from each point to the polygon boundary."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    a, b = poly.edges
    ab = b - a
    L2 = np.abs(ab) ** 2
    out = np.empty(len(z))
    step = max(1, chunk // len(a))
    for s in range(0, len(z), step):
        zz = z[s:s + step, None]
        t = np.clip(((zz - a) * ab.conj()).real / L2, 0.0, 1.0)
        out[s:s + step] = np.min(np.abs(zz - (a + t * ab)), axis=1)
    return out


def winding_inside(poly: Polygon, points, chunk: int = 2_000_000) -> np.ndarray:
    """Strict interior test by the winding-number rule (boundary points undefined)."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    a, b = poly.edges
    out = np.empty(len(z), dtype=bool)
    step = max(1, chunk // len(a))
    for s in range(0, len(z), step):
        zz = z[s:s + step, None]
        up = (a.imag <= zz.imag) & (b.imag > zz.imag)
        down = (a.imag > zz.imag) & (b.imag <= zz.imag)
        side = orient(a, b, zz)
        wn = np.sum(up & (side > 0), axis=1) - np.sum(down & (side < 0), axis=1)
        out[s:s + step] = wn != 0
    return out


def contains_points(poly: Polygon, points, closed: bool = False, tol=None) -> np.ndarray:
    """Point-in-polygon; `closed` counts boundary points (within tolerance) as inside."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    tol = _tol(poly) if tol is None else tol
    bd = boundary_distance(poly, z) <= tol
    inside = winding_inside(poly, z)
    return (inside | bd) if closed else (inside & ~bd)


def _segment_params(p0, p1, q0, q1):
    """Intersection parameters of segments p and q (arrays broadcast)."""
    r = p1 - p0
    s = q1 - q0
    denom = r.real * s.imag - r.imag * s.real
    qp = q0 - p0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp.real * s.imag - qp.imag * s.real) / denom
        u = (qp.real * r.imag - qp.imag * r.real) / denom
    return t, u, denom


def proper_crossings(a0, a1, b0, b1, tol) -> np.ndarray:
    """Pairs (i, j) where segment i of a properly crosses segment j of b.

    Touching at endpoints and collinear overlaps are not counted.
    """
    out = []
    step = max(1, 4_000_000 // max(1, len(b0)))
    for s in range(0, len(a0), step):
        p0 = a0[s:s + step, None]
        p1 = a1[s:s + step, None]
        o1 = orient(p0, p1, b0)
        o2 = orient(p0, p1, b1)
        o3 = orient(b0, b1, p0)
        o4 = orient(b0, b1, p1)
        scale = np.abs(p1 - p0) * np.abs(b1 - b0)
        eps = tol * scale
        hit = (((o1 > eps) & (o2 < -eps)) | ((o1 < -eps) & (o2 > eps))) & (
            ((o3 > eps) & (o4 < -eps)) | ((o3 < -eps) & (o4 > eps))
        )
        i, j = np.nonzero(hit)
        out.extend(zip((i + s).tolist(), j.tolist()))
    return out


def self_intersections(poly: Polygon, tol: float = 1e-12) -> list:
    """Pairs of edges that cross or overlap; empty for a Jordan polygon."""
    a, b = poly.edges
    n = len(a)
    bad = [(i, j) for i, j in proper_crossings(a, b, a, b, tol) if i < j]
    if bad:
        return bad
    # non-adjacent edges must also stay apart (touching vertices, collinear overlap)
    if n > 3:
        dmin = _nonadjacent_min_distance(poly)
        if dmin <= _tol(poly):
            return [("touch", dmin)]
    return []


def _nonadjacent_min_distance(poly: Polygon) -> float:
    """Smallest distance from a vertex to an edge not incident to it."""
    w = poly.vertices
    a, b = poly.edges
    n = len(w)
    ab = b - a
    L2 = np.abs(ab) ** 2
    best = np.inf
    step = max(1, 2_000_000 // n)
    idx = np.arange(n)
    for s in range(0, n, step):
        zz = w[s:s + step, None]
        t = np.clip(((zz - a) * ab.conj()).real / L2, 0.0, 1.0)
        d = np.abs(zz - (a + t * ab))
        rows = idx[s:s + step, None]
        incident = (idx[None, :] == rows) | (idx[None, :] == (rows - 1) % n)
        d[incident] = np.inf
        best = min(best, float(d.min()))
    return best


def vertex_edge_clearance(poly: Polygon) -> np.ndarray:
    """Per vertex: distance to the nearest edge not incident to it."""
    w = poly.vertices
    a, b = poly.edges
    n = len(w)
    ab = b - a
    L2 = np.abs(ab) ** 2
    out = np.empty(n)
    step = max(1, 2_000_000 // n)
    idx = np.arange(n)
    for s in range(0, n, step):
        zz = w[s:s + step, None]
        t = np.clip(((zz - a) * ab.conj()).real / L2, 0.0, 1.0)
        d = np.abs(zz - (a + t * ab))
        rows = idx[s:s + step, None]
        incident = (idx[None, :] == rows) | (idx[None, :] == (rows - 1) % n)
        d[incident] = np.inf
        out[s:s + step] = d.min(axis=1)
    return out


def polygon_contains(outer: Polygon, inner: Polygon) -> bool:
    """Closed containment inner ⊆ closure(outer), allowing shared boundary.

    Every inner edge is cut at its contacts with outer edges and the midpoint
    of each piece is classified, so boundary touching is handled exactly up to
    the tolerance.
    """
    tol = _tol(outer)
    if not np.all(contains_points(outer, inner.vertices, closed=True, tol=tol)):
        return False
    if proper_crossings(*inner.edges, *outer.edges, tol=1e-12):
        return False
    a0, a1 = inner.edges
    b0, b1 = outer.edges
    mids = []
    step = max(1, 2_000_000 // len(b0))
    for s in range(0, len(a0), step):
        p0 = a0[s:s + step, None]
        p1 = a1[s:s + step, None]
        t, u, denom = _segment_params(p0, p1, b0, b1)
        hit = (np.abs(denom) > 0) & (t > 0) & (t < 1) & (u >= -1e-12) & (u <= 1 + 1e-12)
        # outer vertices lying on the inner edge (collinear touching)
        r = p1 - p0
        tv = ((b0 - p0) * r.conj()).real / np.abs(r) ** 2
        dv = np.abs(b0 - (p0 + np.clip(tv, 0, 1) * r))
        onv = (dv <= tol) & (tv > 0) & (tv < 1)
        for k in range(p0.shape[0]):
            ts = np.concatenate(([0.0, 1.0], t[k][hit[k]], tv[k][onv[k]]))
            ts = np.unique(np.clip(ts, 0, 1))
            mid = 0.5 * (ts[:-1] + ts[1:])
            mids.append(p0[k, 0] + mid * r[k, 0])
    mids = np.concatenate(mids)
    return bool(np.all(contains_points(outer, mids, closed=True, tol=tol)))


def regular_polygon(m: int, radius: float = 1.0, phase: float = np.pi / 2) -> np.ndarray:
    k = np.arange(m)
    return radius * np.exp(1j * (phase + 2 * np.pi * k / m))
