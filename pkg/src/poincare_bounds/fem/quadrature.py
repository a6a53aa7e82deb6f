"""Quadrature on triangles, including cells touching a weight singularity.

Rules live on the reference triangle (0,0), (1,0), (0,1) and are collapsed
(Duffy) tensor products: xi = s(1-u), eta = s u with Gauss-Jacobi nodes in s
absorbing the Jacobian s.  A rule with n nodes per direction is exact for
total degree 2n - 1.

Near a point z_k on the boundary where the weight behaves like
|z - z_k|^gamma, cells are split until z_k is a corner of every piece that
touches it.  Those pieces use a radial substitution s = t^3, which turns
s^(gamma+1) ds into a polynomial in t whenever 3 gamma is an integer (all
Koch and Gosper corner exponents are multiples of 1/3 or 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from ..errors import ParameterError, QuadratureError

MAX_ORDER = 8
NEAR_FACTOR = 0.75     # subdivide while a singular point is within this many diameters
MAX_DEPTH = 40


@dataclass(frozen=True)
class TriangleRule:
    xi: np.ndarray
    eta: np.ndarray
    weights: np.ndarray   # sums to 1/2, the reference area
    degree: int

    @property
    def n_points(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=64)
def collapsed_rule(n: int) -> TriangleRule:
    """Collapsed Gauss rule with n x n nodes, exact for degree 2n - 1."""
    x, w = np.polynomial.legendre.leggauss(n)
    xa, wa = roots_jacobi(n, 0, 1)
    s = (xa + 1) / 2
    ws = wa / 4
    u = (x + 1) / 2
    wu = w / 2
    S, U = np.meshgrid(s, u, indexing="ij")
    W = np.outer(ws, wu)
    return TriangleRule((S * (1 - U)).ravel(), (S * U).ravel(), W.ravel(), 2 * n - 1)


def rule_of_degree(degree: int) -> TriangleRule:
    return collapsed_rule(max(1, (degree + 2) // 2))


def quadrature_rule(p: int, weight_kind: str = "interior") -> TriangleRule:
    """Rule for order-p elements.

    interior: exact to degree 2p + 4; boundary: degree 2p + 10 for cells
    touching the boundary, where the weight varies fastest; reference: twice
    the boundary degree, for accuracy checks.
    """
    if not 1 <= p <= MAX_ORDER:
        raise ParameterError(f"element order must be in 1..{MAX_ORDER}, got {p}")
    degree = {"interior": 2 * p + 4, "boundary": 2 * p + 10, "reference": 4 * p + 20}.get(weight_kind)
    if degree is None:
        raise ParameterError(f"unknown weight kind {weight_kind!r}")
    return rule_of_degree(degree)


@lru_cache(maxsize=64)
def corner_rule(n_t: int, n_u: int) -> TriangleRule:
    """Rule for integrands ~ r^gamma at vertex (0,0), with s = t^3."""
    t, wt = np.polynomial.legendre.leggauss(n_t)
    t = (t + 1) / 2
    wt = wt / 2
    u, wu = np.polynomial.legendre.leggauss(n_u)
    u = (u + 1) / 2
    wu = wu / 2
    T, U = np.meshgrid(t, u, indexing="ij")
    S = T ** 3
    W = np.outer(wt * 3 * t ** 5, wu)      # s ds = 3 t^5 dt
    return TriangleRule((S * (1 - U)).ravel(), (S * U).ravel(), W.ravel(), -1)


def map_rule(rule: TriangleRule, corners) -> tuple[np.ndarray, np.ndarray]:
    """Physical points and weights of `rule` on the triangle `corners` (complex)."""
    c0, c1, c2 = corners
    e1 = c1 - c0
    e2 = c2 - c0
    det = abs(e1.real * e2.imag - e1.imag * e2.real)
    return c0 + rule.xi * e1 + rule.eta * e2, rule.weights * det


def _closest_on_triangle(z: np.ndarray, tri) -> np.ndarray:
    """Distance from points z to the closed triangle tri."""
    a, b, c = tri
    d = np.full(len(z), np.inf)
    for p, q in ((a, b), (b, c), (c, a)):
        e = q - p
        t = np.clip(((z - p) * np.conj(e)).real / abs(e) ** 2, 0, 1)
        d = np.minimum(d, np.abs(z - (p + t * e)))
    inside = _inside(z, tri, 0.0)
    return np.where(inside, 0.0, d)


def _inside(z, tri, tol):
    a, b, c = tri
    def side(p, q):
        e = q - p
        return (e.real * (z - p).imag - e.imag * (z - p).real) / abs(e)
    return (side(a, b) >= -tol) & (side(b, c) >= -tol) & (side(c, a) >= -tol)


def _diameter(tri) -> float:
    a, b, c = tri
    return max(abs(b - a), abs(c - b), abs(a - c))


def singular_cell_rule(tri, singular, regular: TriangleRule, corner: TriangleRule,
                       near: float = NEAR_FACTOR, max_depth: int = MAX_DEPTH):
    """Points and weights on a physical triangle whose weight is singular at
    some of the points `singular` (complex, on or near the cell).

    Pieces with no singular point within `near` diameters get `regular`; a
    piece with exactly one singular point at a corner and none other nearby
    gets `corner`; anything else is split.
    """
    singular = np.asarray(singular, dtype=complex)
    pts: list[np.ndarray] = []
    wts: list[np.ndarray] = []
    # fixed at the top cell, so points a rounding error off an edge stay touching
    tol = 1e-12 * _diameter(tri)

    def visit(t, depth):
        diam = _diameter(t)
        if len(singular):
            dist = _closest_on_triangle(singular, t)
        else:
            dist = np.zeros(0)
        touching = np.nonzero(dist <= tol)[0]
        close = np.nonzero(dist < near * diam)[0]
        if len(close) == 0:
            z, w = map_rule(regular, t)
            pts.append(z)
            wts.append(w)
            return
        if depth >= max_depth:
            raise QuadratureError(f"singular cell subdivision exceeded depth {max_depth}")
        if len(touching) == 1 and len(close) == 1:
            s = singular[touching[0]]
            dv = np.abs(np.asarray(t) - s)
            k = int(dv.argmin())
            if dv[k] <= tol:
                z, w = map_rule(corner, (t[k], t[(k + 1) % 3], t[(k + 2) % 3]))
                pts.append(z)
                wts.append(w)
                return
            # on an edge or inside: fan out from the singular point
            for q in range(3):
                p1, p2 = t[q], t[(q + 1) % 3]
                e = p2 - p1
                area2 = e.real * (s - p1).imag - e.imag * (s - p1).real
                if abs(area2) > tol * abs(e):
                    visit((s, p1, p2), depth + 1)
            return
        a, b, c = t
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        for child in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (bc, ca, ab)):
            visit(child, depth + 1)

    visit(tuple(complex(v) for v in tri), 0)
    return np.concatenate(pts), np.concatenate(wts)
