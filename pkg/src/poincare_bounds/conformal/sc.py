"""Schwarz-Christoffel maps from the unit disk onto polygons.

    g(xi) = A + C * int_0^xi prod_k (1 - zeta/xi_k)^(alpha_k - 1) dzeta

Polygons with an m-fold rotational symmetry (vertex k -> k + n/m) have
prevertex orbits xi_k * omega^r, omega = e^{2 pi i/m}, sharing one exponent, and
the product over an orbit collapses to (1 - (zeta/xi_k)^m)^(alpha_k - 1).  Each
factor 1 - zeta/xi has positive real part in the disk, so summing principal
logarithms of the factors gives the principal branch of the whole product;
the same holds for the collapsed orbit factors.

Integrals run along straight segments with compound Gauss-Jacobi quadrature:
a segment is split at its midpoint until every singularity other than its own
endpoints lies at least half a segment length away, and endpoint singular
factors are divided out analytically so that nodes next to a prevertex lose no
accuracy.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConvergenceError, CrowdingError, GeometryError, ParameterError, QuadratureError
from ..geometry.polygon import Polygon
from .quadrature import DEFAULT_NODES, gauss_jacobi

log = logging.getLogger(__name__)

CROWDING_GAP = 1e-13
STALL_STEPS = 50
ACCEPT_TOL = 1e-10
SPLIT_RATIO = 0.5
MAX_DEPTH = 60
PREVERTEX_SNAP = 1e-14


@dataclass(frozen=True, eq=False)
class PrevertexSolution:
    prevertices: np.ndarray
    exponents: np.ndarray
    C: complex
    A: complex
    fixed_indices: tuple
    symmetry: int = 1
    vertices: Optional[np.ndarray] = None
    residual: float = np.nan
    history: tuple = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return len(self.prevertices)

    @property
    def sector_size(self) -> int:
        return self.n // self.symmetry

    @property
    def sector(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.sector_size
        return self.prevertices[:k], self.exponents[:k]

    @property
    def arguments(self) -> np.ndarray:
        return np.angle(self.prevertices)

    def __call__(self, xi):
        return sc_evaluate(self, xi)

    def derivative(self, zeta) -> np.ndarray:
        """g'(zeta) = C * prod(...) for points in the open disk."""
        zeta = np.asarray(zeta, dtype=complex)
        return self.C * np.exp(_log_product(self, zeta.ravel())).reshape(zeta.shape)

    # serialization -------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "prevertices": [float(f"{a:.17g}") for a in self.arguments],
            "exponents": [float(f"{b:.17g}") for b in self.exponents],
            "C": [float(f"{self.C.real:.17g}"), float(f"{self.C.imag:.17g}")],
            "A": [float(f"{self.A.real:.17g}"), float(f"{self.A.imag:.17g}")],
            "fixed_indices": list(map(int, self.fixed_indices)),
            "symmetry": int(self.symmetry),
            "vertices": None if self.vertices is None
            else [[float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")] for z in self.vertices],
            "residual": float(self.residual),
            "normalization": "C from side 0 (w_0 -> w_1); A = g(0) from w_0",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PrevertexSolution":
        verts = data.get("vertices")
        return cls(
            prevertices=np.exp(1j * np.array(data["prevertices"], dtype=float)),
            exponents=np.array(data["exponents"], dtype=float),
            C=complex(*data["C"]),
            A=complex(*data["A"]),
            fixed_indices=tuple(data["fixed_indices"]),
            symmetry=int(data.get("symmetry", 1)),
            vertices=None if verts is None else np.array([complex(x, y) for x, y in verts]),
            residual=float(data.get("residual", np.nan)),
        )

    @classmethod
    def from_json(cls, text: str) -> "PrevertexSolution":
        return cls.from_dict(json.loads(text))


# ----------------------------------------------------------------------------
# integrand


def _log_product(sol: PrevertexSolution, zeta: np.ndarray, compressed: bool = True,
                 chunk: int = 1 << 21) -> np.ndarray:
    """log prod_k (1 - zeta/xi_k)^beta_k, summed as principal logs."""
    if compressed:
        xi, beta = sol.sector
        m = sol.symmetry
    else:
        xi, beta = sol.prevertices, sol.exponents
        m = 1
    out = np.empty(len(zeta), dtype=complex)
    step = max(1, chunk // max(1, len(xi)))
    for s in range(0, len(zeta), step):
        t = zeta[s:s + step, None] / xi[None, :]
        if m > 1:
            t = t**m
        out[s:s + step] = np.log1p(-t) @ beta
    return out


def _orbit(sol: PrevertexSolution, idx: int) -> np.ndarray:
    k = sol.sector_size
    return (idx % k) + k * np.arange(sol.symmetry)


def _segment_log_regular(sol: PrevertexSolution, za, zb, ia, ib, x, compressed=True):
    """log of the integrand at nodes on [za, zb] with endpoint singular powers
    (1+x)^beta_a and (1-x)^beta_b removed."""
    zeta = za + (zb - za) * (1 + x) / 2
    special = [i for i in (ia, ib) if i is not None]
    if not special:
        return _log_product(sol, zeta, compressed)
    k = sol.sector_size
    if compressed:
        orbits = sorted({i % k for i in special})
        keep = np.ones(k, dtype=bool)
        keep[orbits] = False
        xi_s, beta_s = sol.sector
        t = (zeta[:, None] / xi_s[None, keep]) ** sol.symmetry
        acc = np.log1p(-t) @ beta_s[keep]
        members = np.concatenate([_orbit(sol, o) for o in orbits])
    else:
        keep = np.ones(sol.n, dtype=bool)
        keep[special] = False
        acc = np.log1p(-(zeta[:, None] / sol.prevertices[None, keep])) @ sol.exponents[keep]
        members = np.array(special)
    for i in members:
        xi_i = sol.prevertices[i]
        beta = sol.exponents[i]
        if i == ia:
            acc = acc + beta * np.log(-(zb - za) / (2 * xi_i))
        elif i == ib:
            acc = acc + beta * np.log((zb - za) / (2 * xi_i))
        else:
            acc = acc + beta * np.log1p(-zeta / xi_i)
    return acc


def _split(sol: PrevertexSolution, za, zb, ia, ib, depth=0):
    """Compound pieces (za, zb, ia, ib) obeying the one-half rule."""
    pts = sol.prevertices
    d = zb - za
    L = abs(d)
    if L == 0:
        return []
    t = np.clip(((pts - za) * np.conj(d)).real / L**2, 0.0, 1.0)
    dist = np.abs(pts - (za + t * d))
    if ia is not None:
        dist[ia] = np.inf
    if ib is not None:
        dist[ib] = np.inf
    if dist.min() >= SPLIT_RATIO * L:
        return [(za, zb, ia, ib)]
    if depth >= MAX_DEPTH:
        raise QuadratureError(f"segment subdivision exceeded depth {MAX_DEPTH} (singularity at distance {dist.min():.2e})")
    zm = 0.5 * (za + zb)
    return _split(sol, za, zm, ia, None, depth + 1) + _split(sol, zm, zb, None, ib, depth + 1)


def integrate_segment(sol: PrevertexSolution, za, zb, ia=None, ib=None,
                      nodes: int = DEFAULT_NODES, compressed: bool = True) -> complex:
    """int_za^zb prod(...) dzeta (without the constant C)."""
    total = 0j
    for a, b, i, j in _split(sol, complex(za), complex(zb), ia, ib):
        beta_a = sol.exponents[i] if i is not None else 0.0
        beta_b = sol.exponents[j] if j is not None else 0.0
        x, w = gauss_jacobi(nodes, beta_b, beta_a)
        vals = np.exp(_segment_log_regular(sol, a, b, i, j, x, compressed))
        total += (b - a) / 2 * np.dot(w, vals)
    return total


def side_integrals(sol: PrevertexSolution, sides=None, nodes=DEFAULT_NODES, compressed=True) -> np.ndarray:
    n = sol.n
    sides = range(n) if sides is None else sides
    out = []
    for k in sides:
        k1 = (k + 1) % n
        out.append(integrate_segment(sol, sol.prevertices[k], sol.prevertices[k1], k, k1, nodes, compressed))
    return np.array(out)


# ----------------------------------------------------------------------------
# parameter problem


def detect_symmetry(poly: Polygon, candidates=(6, 4, 3, 2)) -> int:
    w = poly.vertices
    n = len(w)
    c = w.mean()
    tol = 1e-10 * np.max(np.abs(w - c))
    for m in candidates:
        if n % m:
            continue
        rot = c + (w - c) * np.exp(2j * np.pi / m)
        if np.max(np.abs(np.roll(w, -n // m) - rot)) <= tol:
            return m
    return 1


def _assemble(theta_sector, m):
    rots = np.exp(2j * np.pi * np.arange(m) / m)
    xi = (np.exp(1j * theta_sector)[None, :] * rots[:, None]).ravel()
    return xi


def solve_parameter_problem(target: Polygon, fixed=None, symmetry: Optional[int] = None,
                            tol: float = 1e-12, max_iter: int = 2000, relax: float = 0.75,
                            nodes: int = DEFAULT_NODES) -> PrevertexSolution:
    """Prevertices reproducing the side lengths of `target`.

    `fixed` is a list of (vertex index, prevertex) pairs; they must be the
    equally spaced indices 0, n/m, 2n/m, ... and equally spaced points on the
    circle, which fixes the symmetry order m.  Without `fixed`, m is detected
    from the polygon and the fixed prevertices are e^{i(pi/2 + 2 pi r/m)}.

    The free prevertex gaps of one sector follow the Davis iteration
    gap_k <- gap_k * (l_k / |I_k|)^relax, renormalised to the sector length.
    """
    n = target.n
    if fixed is not None:
        fixed = sorted(fixed)
        m = len(fixed)
        if m < 1 or n % m:
            raise ParameterError("fixed prevertices must split the vertices into equal sectors")
        idx = [i for i, _ in fixed]
        if idx != [r * (n // m) for r in range(m)]:
            raise ParameterError("fixed vertex indices must be 0, n/m, 2n/m, ...")
        pv = np.array([p for _, p in fixed], dtype=complex)
        if np.max(np.abs(np.abs(pv) - 1)) > 1e-14 or np.max(np.abs(pv / pv[0] - np.exp(2j * np.pi * np.arange(m) / m))) > 1e-12:
            raise ParameterError("fixed prevertices must be equally spaced on the unit circle")
        theta0 = float(np.angle(pv[0]))
        if symmetry is not None and symmetry != m:
            raise ParameterError("symmetry disagrees with the fixed prevertices")
    else:
        m = symmetry or detect_symmetry(target)
        theta0 = np.pi / 2
    if m > 1 and detect_symmetry(target, (m,)) != m:
        raise GeometryError(f"target polygon is not {m}-fold symmetric")
    ns = n // m
    beta = target.angle_fractions - 1.0
    if abs(beta.sum() + 2.0) > 1e-10:
        raise GeometryError(f"exponents sum to {beta.sum()}, not -2")
    w = target.vertices
    ell = target.edge_lengths[:ns]
    sector = 2 * np.pi / m

    def make(gaps, C=1.0, A=0.0, residual=np.nan, history=()):
        theta = theta0 + np.concatenate([[0.0], np.cumsum(gaps[:-1])])
        xi = _assemble(theta, m)
        return PrevertexSolution(xi, beta, C, A, tuple(r * ns for r in range(m)), m, w, residual, tuple(history))

    def lengths(gaps):
        sol = make(gaps)
        return np.abs(side_integrals(sol, range(ns), nodes))

    def residual_of(L):
        c = ell[0] / L[0]
        return float(np.max(np.abs(c * L / ell - 1.0)))

    history = []
    if ns == 1:
        gaps = np.array([sector])
        L = lengths(gaps)
        res = residual_of(L)
        history.append(res)
    else:
        gaps = np.full(ns, sector / ns)
        best = (np.inf, gaps, 0)
        for it in range(max_iter):
            L = lengths(gaps)
            res = residual_of(L)
            history.append(res)
            if res < best[0]:
                best = (res, gaps, it)
            if res < tol or it - best[2] > STALL_STEPS:
                break
            gaps = gaps * (ell / L) ** relax
            gaps *= sector / gaps.sum()
            if gaps.min() < CROWDING_GAP:
                raise CrowdingError(f"prevertex gap {gaps.min():.2e} below {CROWDING_GAP:g}")
        res, gaps, _ = best
        if res >= tol:
            # the quadrature noise floor can sit just above tol at deep levels
            if res > ACCEPT_TOL:
                raise ConvergenceError(f"Davis iteration did not converge (residual {res:.2e})", history)
            log.warning("Davis iteration stalled at residual %.2e (target %.0e); accepting", res, tol)
    sol = make(gaps)
    I = side_integrals(sol, [0], nodes)
    C = (w[1] - w[0]) / I[0]
    A = w[0] - C * integrate_segment(sol, 0.0, sol.prevertices[0], None, 0, nodes)
    log.debug("parameter problem n=%d m=%d: residual %.2e after %d steps", n, m, res, len(history))
    return make(gaps, C, A, res, history)


def side_length_residual(sol: PrevertexSolution, nodes: int = 2 * DEFAULT_NODES, compressed: bool = False) -> float:
    """Relative side-length mismatch of all sides, recomputed independently.

    Defaults to the uncompressed product and a doubled node count, so it does
    not share the solver's integrand.
    """
    if sol.vertices is None:
        raise ParameterError("solution carries no target vertices")
    L = np.abs(sol.C) * np.abs(side_integrals(sol, None, nodes, compressed))
    ell = np.abs(np.roll(sol.vertices, -1) - sol.vertices)
    return float(np.max(np.abs(L / ell - 1.0)))


# ----------------------------------------------------------------------------
# evaluation and inversion


def _evaluate_one(sol: PrevertexSolution, z: complex, anchor: Optional[str], nodes: int) -> complex:
    near = int(np.argmin(np.abs(sol.prevertices - z)))
    if abs(z - sol.prevertices[near]) <= PREVERTEX_SNAP:
        # a rounding error away from a prevertex the endpoint exponent must still be absorbed
        z = complex(sol.prevertices[near])
    use_vertex = anchor == "vertex" or (anchor is None and abs(z) > 0.5)
    if use_vertex:
        if sol.vertices is None:
            raise ParameterError("vertex anchors need the target vertices")
        if abs(z - sol.prevertices[near]) == 0:
            return complex(sol.vertices[near])
        end = near if abs(z - sol.prevertices[near]) == 0 else None
        return complex(sol.vertices[near] + sol.C * integrate_segment(sol, sol.prevertices[near], z, near, end, nodes))
    end = near if abs(z - sol.prevertices[near]) == 0 else None
    return complex(sol.A + sol.C * integrate_segment(sol, 0.0, z, None, end, nodes))


def sc_evaluate(sol: PrevertexSolution, xi, anchor: Optional[str] = None, nodes: int = DEFAULT_NODES):
    """g(xi) for points of the closed disk.

    Paths start at the centre when |xi| <= 1/2 and at the nearest prevertex
    otherwise; `anchor` ("center" or "vertex") forces one of them.
    """
    arr = np.asarray(xi, dtype=complex)
    flat = arr.ravel()
    if np.any(np.abs(flat) > 1 + 1e-14):
        raise ParameterError("points must lie in the closed unit disk")
    out = np.array([_evaluate_one(sol, complex(z), anchor, nodes) for z in flat])
    return out.reshape(arr.shape) if arr.ndim else complex(out[0])
