"""Assembly of the quadratic pencil Q(z) = K - 2z L + z^2 M.

Unknowns are (v, t1, t2) in the same order-p Lagrange space, v vanishing on
the boundary.  With w = |f'| sampled at quadrature points,

    K = int w^-2 div t_a div t_b + grad v_a . grad v_b
    L = int grad v_a . t_b + t_a . grad v_b
    M = int w^2 v_a v_b + t_a . t_b

(the real symmetric form of the grad-div system; for v = 0 on the boundary
int -div t v = int t . grad v).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.spatial import cKDTree

from ..errors import QuadratureError
from .lagrange import DofMap, basis, build_dofmap
from .mesh import TriangleMesh, project_to_outline
from .quadrature import NEAR_FACTOR, TriangleRule, corner_rule, quadrature_rule, singular_cell_rule

CHUNK = 1024
POINT_BATCH = 200_000
# inside singular cells: pieces away from the singular points are small, so
# the interior rule suffices; corner pieces use (p+6) x (p+5) nodes
SUBCELL_RULE = "interior"


def corner_nodes(p: int, boost: int = 0) -> tuple[int, int]:
    """(radial, angular) sizes of the corner rule.

    The angular direction converges slowly where singular points crowd
    (T_2: area error 6e-5 with 5 angular nodes, 3e-10 with 45).
    """
    return p + 6 + boost, 6 * p + 15 + boost


class UnitWeight:
    """w = 1: the untransplanted problem on the base polygon."""

    singular = (np.zeros(0, dtype=complex), np.zeros(0))

    def __call__(self, z):
        return np.ones(np.shape(z))


class MapWeight:
    """|f'| of a composite map, with its boundary singularities."""

    def __init__(self, cmap):
        self.cmap = cmap
        self.singular = cmap.singular_points()

    def __call__(self, z):
        return self.cmap.abs_derivative(z, check=False)


@dataclass(frozen=True, eq=False)
class QuadraticPencil:
    K: sp.csr_matrix
    L: sp.csr_matrix
    M: sp.csr_matrix
    dofmap: DofMap = field(repr=False)
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.K.shape[0]

    def evaluate(self, z):
        """Q(z) as a sparse matrix."""
        return self.K - 2 * z * self.L + z * z * self.M

    def symmetry_defects(self) -> dict:
        return {name: _asymmetry(getattr(self, name)) for name in "KLM"}

    def export_matrix_market(self, directory) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in "KLM":
            path = directory / f"{name}.mtx"
            scipy.io.mmwrite(str(path), getattr(self, name), symmetry="symmetric")
            paths.append(path)
        return paths

    def save_npz(self, path) -> None:
        arrays = {}
        for name in "KLM":
            A = getattr(self, name).tocoo()
            arrays[f"{name}_row"] = A.row
            arrays[f"{name}_col"] = A.col
            arrays[f"{name}_val"] = A.data
        arrays["shape"] = np.array(self.K.shape)
        np.savez_compressed(path, **arrays)

    @classmethod
    def load_npz(cls, path, dofmap: DofMap, metadata: dict) -> "QuadraticPencil":
        data = np.load(path)
        shape = tuple(data["shape"])
        mats = [sp.csr_matrix((data[f"{n}_val"], (data[f"{n}_row"], data[f"{n}_col"])), shape=shape)
                for n in "KLM"]
        return cls(*mats, dofmap, metadata)


def _jacobians(corners):
    """Per-cell inverse Jacobian entries and |det| for the affine reference map."""
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    det = e1.real * e2.imag - e1.imag * e2.real
    # d(xi, eta)/d(x, y)
    inv = np.empty((len(det), 2, 2))
    inv[:, 0, 0] = e2.imag / det
    inv[:, 0, 1] = -e2.real / det
    inv[:, 1, 0] = -e1.imag / det
    inv[:, 1, 1] = e1.real / det
    return inv, np.abs(det)


def _transform_derivatives(R, inv):
    """Physical (dx dx, dx dy, dy dy) matrices from reference ones.

    R[a][b] is int w d_a phi_i d_b phi_j over reference directions a, b.
    """
    # d/dx = inv[0,0] d/dxi + inv[1,0] d/deta ; d/dy = inv[0,1] d/dxi + inv[1,1] d/deta
    gx = (inv[:, 0, 0], inv[:, 1, 0])
    gy = (inv[:, 0, 1], inv[:, 1, 1])

    def combine(g, h):
        out = 0
        for a in range(2):
            for b in range(2):
                out = out + (g[a] * h[b])[:, None, None] * R[a][b]
        return out

    return combine(gx, gx), combine(gx, gy), combine(gy, gy)


def _weighted_blocks(phi, dphi, weights):
    """Reference mass and derivative matrices for per-cell weights (ne, nq)."""
    mass = np.einsum("iq,eq,jq->eij", phi, weights, phi, optimize=True)
    R = [[None, None], [None, None]]
    for a in range(2):
        Wd = weights[:, None, :] * dphi[a][None, :, :]
        for b in range(a, 2):
            R[a][b] = Wd @ dphi[b].T
    R[1][0] = np.transpose(R[0][1], (0, 2, 1))
    return mass, R


class _Collector:
    def __init__(self, n):
        self.n = n
        self.rows, self.cols, self.vals = [], [], []

    def add(self, dofs, Ae):
        nl = dofs.shape[1]
        self.rows.append(np.repeat(dofs, nl, axis=1).ravel())
        self.cols.append(np.tile(dofs, (1, nl)).ravel())
        self.vals.append(Ae.ravel())

    def matrix(self):
        if not self.rows:
            return sp.csr_matrix((self.n, self.n))
        A = sp.coo_matrix((np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
                          shape=(self.n, self.n))
        return A.tocsr()


def _classify(mesh: TriangleMesh, singular_points: np.ndarray, near: float):
    """'special' for cells near a singular point, else 'boundary'/'interior'."""
    ne = mesh.n_cells
    kind = np.where(mesh.boundary_vertex_flags[mesh.triangles].any(axis=1), 1, 0)
    if len(singular_points):
        c = mesh.corners
        centroid = c.mean(axis=1)
        h = mesh.h
        tree = cKDTree(np.column_stack([singular_points.real, singular_points.imag]))
        hits = tree.query_ball_point(np.column_stack([centroid.real, centroid.imag]), r=h / np.sqrt(3) + near * h + 1e-12)
        for e in range(ne):
            if hits[e]:
                kind[e] = 2
    return kind


def assemble_pencil(mesh: TriangleMesh, p: int = 5, weight=None, near: float = NEAR_FACTOR,
                    boost: int = 0, level: int | None = None) -> QuadraticPencil:
    """Pencil for order-p elements on `mesh` with transplantation weight |f'|.

    `weight` is a callable z -> |f'(z)| (default: 1) optionally exposing
    `singular = (points, exponents)` for boundary points where it is singular.
    `boost` raises every quadrature degree by 2*boost.
    """
    t0 = time.perf_counter()
    weight = UnitWeight() if weight is None else weight
    sing = np.asarray(getattr(weight, "singular", (np.zeros(0),))[0], dtype=complex)
    if len(sing):
        # singular points lie on the boundary; remove rounding from the map
        sing = project_to_outline(sing, mesh.outline)
    dm = build_dofmap(mesh, p)
    ns = dm.n_scalar
    corners = mesh.corners
    inv, det = _jacobians(corners)

    # unweighted parts are polynomial: the interior rule is exact for them
    base_rule = quadrature_rule(p, "interior")
    phi, dxi, deta = basis(p, base_rule.xi, base_rule.eta)
    wq = base_rule.weights
    M0_ref = (phi * wq) @ phi.T
    R0 = [[(dxi * wq) @ dxi.T, (dxi * wq) @ deta.T], [(deta * wq) @ dxi.T, (deta * wq) @ deta.T]]
    Bxi = (dxi * wq) @ phi.T
    Beta = (deta * wq) @ phi.T

    S = _Collector(ns)
    M0 = _Collector(ns)
    Bx = _Collector(ns)
    By = _Collector(ns)
    Mw = _Collector(ns)
    Dxx = _Collector(ns)
    Dxy = _Collector(ns)
    Dyy = _Collector(ns)

    R0e = [[np.broadcast_to(R0[a][b], (1,) + R0[a][b].shape) for b in range(2)] for a in range(2)]
    for lo in range(0, mesh.n_cells, CHUNK):
        sl = slice(lo, lo + CHUNK)
        dofs = dm.cell_dofs[sl]
        d = det[sl][:, None, None]
        xx, xy, yy = _transform_derivatives(R0e, inv[sl])
        S.add(dofs, (xx + yy) * d)
        M0.add(dofs, M0_ref[None] * d)
        # int d_x phi_i phi_j
        Bx.add(dofs, (inv[sl, 0, 0][:, None, None] * Bxi + inv[sl, 1, 0][:, None, None] * Beta) * d)
        By.add(dofs, (inv[sl, 0, 1][:, None, None] * Bxi + inv[sl, 1, 1][:, None, None] * Beta) * d)

    kind = _classify(mesh, sing, near)
    rules = {
        0: quadrature_rule(p, "interior"),
        1: quadrature_rule(p, "boundary"),
    }
    if boost:
        from .quadrature import rule_of_degree
        rules = {k: rule_of_degree(r.degree + 2 * boost) for k, r in rules.items()}
    n_points = 0
    for k, rule in rules.items():
        cells = np.nonzero(kind == k)[0]
        if not len(cells):
            continue
        phi, dxi, deta = basis(p, rule.xi, rule.eta)
        for lo in range(0, len(cells), CHUNK):
            idx = cells[lo:lo + CHUNK]
            c = corners[idx]
            z = c[:, :1] + np.outer(c[:, 1] - c[:, 0], rule.xi) + np.outer(c[:, 2] - c[:, 0], rule.eta)
            w = _sample(weight, z)
            n_points += z.size
            wq = rule.weights[None, :] * det[idx][:, None]
            mass, _ = _weighted_blocks(phi, (dxi, deta), wq * w ** 2)
            _, R = _weighted_blocks(phi[:0], (dxi, deta), wq / w ** 2)
            xx, xy, yy = _transform_derivatives(R, inv[idx])
            dofs = dm.cell_dofs[idx]
            Mw.add(dofs, mass)
            Dxx.add(dofs, xx)
            Dxy.add(dofs, xy)
            Dyy.add(dofs, yy)

    special = np.nonzero(kind == 2)[0]
    if len(special):
        regular = rules[0] if SUBCELL_RULE == "interior" else rules[1]
        crule = corner_rule(*corner_nodes(p, boost))
        tree = cKDTree(np.column_stack([sing.real, sing.imag]))
        batch: list = []
        size = 0
        for n, e in enumerate(special):
            c = corners[e]
            centre = c.mean()
            near_idx = tree.query_ball_point([centre.real, centre.imag], r=(1 + 2 * near) * mesh.h + 1e-12)
            z, wt = singular_cell_rule(c, sing[near_idx], regular, crule, near=near)
            batch.append((e, z, wt))
            size += len(z)
            if size >= POINT_BATCH or n == len(special) - 1:
                n_points += size
                for e2, Ae in _singular_blocks(batch, weight, p, corners, inv):
                    dofs = dm.cell_dofs[e2:e2 + 1]
                    for col, A in zip((Mw, Dxx, Dxy, Dyy), Ae):
                        col.add(dofs, A)
                batch = []
                size = 0

    S, M0, Bx, By = S.matrix(), M0.matrix(), Bx.matrix(), By.matrix()
    Mw, Dxx, Dxy, Dyy = Mw.matrix(), Dxx.matrix(), Dxy.matrix(), Dyy.matrix()
    I = dm.interior
    Bx_I = Bx[I]
    By_I = By[I]
    K = sp.bmat([[S[I][:, I], None, None], [None, Dxx, Dxy], [None, Dxy.T, Dyy]], format="csr")
    L = sp.bmat([[None, Bx_I, By_I], [Bx_I.T, None, None], [By_I.T, None, None]], format="csr")
    M = sp.bmat([[Mw[I][:, I], None, None], [None, M0, None], [None, None, M0]], format="csr")
    # defects before the final symmetrization measure the assembly itself
    raw = {name: _asymmetry(A) for name, A in zip("KLM", (K, L, M))}
    K, L, M = (_symmetrize(A) for A in (K, L, M))
    meta = {
        "raw_symmetry_defect": raw,
        "level": level,
        "p": p,
        "refinement": mesh.refinement_level,
        "mesh": mesh.kind,
        "dimension": K.shape[0],
        "quadrature_degree": {"interior": rules[0].degree, "boundary": rules[1].degree},
        "singular_cells": int(len(special)),
        "weight_points": int(n_points),
        "assembly_seconds": time.perf_counter() - t0,
    }
    return QuadraticPencil(K, L, M, dm, meta)


def _singular_blocks(batch, weight, p, corners, inv):
    """Weighted element matrices for cells with custom point sets."""
    z = np.concatenate([q[1] for q in batch])
    wt = np.concatenate([q[2] for q in batch])
    owner = np.concatenate([np.full(len(q[1]), q[0]) for q in batch])
    w = _sample(weight, z)
    # reference coordinates of every point in its owning cell
    rel = z - corners[owner, 0]
    xi = inv[owner, 0, 0] * rel.real + inv[owner, 0, 1] * rel.imag
    eta = inv[owner, 1, 0] * rel.real + inv[owner, 1, 1] * rel.imag
    phi, dxi, deta = basis(p, xi, eta)
    lo = 0
    for e, zc, _ in batch:
        s = slice(lo, lo + len(zc))
        lo += len(zc)
        mass, _ = _weighted_blocks(phi[:, s], (dxi[:, s], deta[:, s]), (wt[s] * w[s] ** 2)[None])
        _, R = _weighted_blocks(phi[:0, s], (dxi[:, s], deta[:, s]), (wt[s] / w[s] ** 2)[None])
        xx, xy, yy = _transform_derivatives(R, inv[e:e + 1])
        yield e, (mass, xx, xy, yy)


def _asymmetry(A) -> float:
    """||A - A^T||_F / ||A||_F."""
    norm = sp.linalg.norm(A)
    return float(sp.linalg.norm(A - A.T) / norm) if norm else 0.0


def _symmetrize(A):
    return ((A + A.T) * 0.5).tocsr()


def _sample(weight, z):
    w = np.asarray(weight(z), dtype=float)
    if w.shape != np.shape(z):
        w = np.broadcast_to(w, np.shape(z))
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise QuadratureError("weight is not finite and positive at every quadrature node")
    return w


def weight_integral(mesh: TriangleMesh, weight, power: float = 2.0, p: int = 5, near: float = NEAR_FACTOR) -> float:
    """int w^power over the mesh with the quadrature used for the pencil.

    With power 2 this is the area of the image domain f(Omega_0).
    """
    sing = np.asarray(getattr(weight, "singular", (np.zeros(0),))[0], dtype=complex)
    if len(sing):
        sing = project_to_outline(sing, mesh.outline)
    corners = mesh.corners
    kind = _classify(mesh, sing, near)
    total = 0.0
    rules = {0: quadrature_rule(p, "interior"), 1: quadrature_rule(p, "boundary")}
    for k, rule in rules.items():
        idx = np.nonzero(kind == k)[0]
        if len(idx):
            c = corners[idx]
            z = c[:, :1] + np.outer(c[:, 1] - c[:, 0], rule.xi) + np.outer(c[:, 2] - c[:, 0], rule.eta)
            e1, e2 = c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]
            det = np.abs(e1.real * e2.imag - e1.imag * e2.real)
            total += float(np.sum(_sample(weight, z) ** power * rule.weights[None, :] * det[:, None]))
    special = np.nonzero(kind == 2)[0]
    if len(special):
        crule = corner_rule(*corner_nodes(p))
        for e in special:
            z, wt = singular_cell_rule(corners[e], sing, rules[0], crule, near=near)
            total += float(np.sum(_sample(weight, z) ** power * wt))
    return total
