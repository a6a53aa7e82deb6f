"""Order-p Lagrange elements on triangles and the global degree-of-freedom map."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import ParameterError
from .mesh import TriangleMesh, on_outline
from .quadrature import MAX_ORDER


@lru_cache(maxsize=16)
def lattice(p: int) -> np.ndarray:
    """Barycentric index triples (k1, k2, k3), k1+k2+k3 = p, of the nodes.

    Node (k1, k2, k3) sits at barycentric coordinates (k1, k2, k3)/p with
    respect to the reference corners (0,0), (1,0), (0,1).
    """
    out = [(p - i - j, i, j) for j in range(p + 1) for i in range(p + 1 - j)]
    arr = np.array(out, dtype=int)
    arr.setflags(write=False)
    return arr


def _silvester(k: int, p: int, lam):
    """R_k(lam) = prod_{l<k} (p lam - l)/(l+1) and its derivative."""
    val = np.ones_like(lam)
    der = np.zeros_like(lam)
    for l in range(k):
        f = (p * lam - l) / (l + 1)
        der = der * f + val * (p / (l + 1))
        val = val * f
    return val, der


def basis(p: int, xi, eta):
    """Values and reference derivatives (phi, dphi/dxi, dphi/deta), each (nloc, npts)."""
    if not 1 <= p <= MAX_ORDER:
        raise ParameterError(f"element order must be in 1..{MAX_ORDER}, got {p}")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l1 = 1 - xi - eta
    phi, dx, dy = [], [], []
    for k1, k2, k3 in lattice(p):
        a, da = _silvester(k1, p, l1)
        b, db = _silvester(k2, p, xi)
        c, dc = _silvester(k3, p, eta)
        phi.append(a * b * c)
        dx.append(-da * b * c + a * db * c)
        dy.append(-da * b * c + a * b * dc)
    return np.array(phi), np.array(dx), np.array(dy)


def reference_nodes(p: int) -> tuple[np.ndarray, np.ndarray]:
    lat = lattice(p)
    return lat[:, 1] / p, lat[:, 2] / p


@dataclass(frozen=True, eq=False)
class DofMap:
    """Scalar numbering shared by v, t1 and t2.

    The global unknown vector is [v on interior nodes, t1 on all nodes,
    t2 on all nodes]; v is fixed to zero on `dirichlet_mask`.
    """

    p: int
    cell_dofs: np.ndarray        # (ne, nloc) scalar node numbers
    nodes: np.ndarray            # complex coordinates of scalar nodes
    dirichlet_mask: np.ndarray   # bool over scalar nodes

    @property
    def n_scalar(self) -> int:
        return len(self.nodes)

    @property
    def interior(self) -> np.ndarray:
        return np.nonzero(~self.dirichlet_mask)[0]

    @property
    def n_v(self) -> int:
        return int((~self.dirichlet_mask).sum())

    @property
    def dimension(self) -> int:
        return 3 * self.n_scalar - int(self.dirichlet_mask.sum())

    def field_slices(self) -> dict:
        nv, ns = self.n_v, self.n_scalar
        return {"v": slice(0, nv), "t1": slice(nv, nv + ns), "t2": slice(nv + ns, nv + 2 * ns)}


def build_dofmap(mesh: TriangleMesh, p: int) -> DofMap:
    """Number the order-p nodes of `mesh`; shared edge and vertex nodes coincide."""
    xi, eta = reference_nodes(p)
    c = mesh.corners
    pts = c[:, :1] + np.outer(c[:, 1] - c[:, 0], xi) + np.outer(c[:, 2] - c[:, 0], eta)
    h = mesh.h / p
    flat = pts.ravel()
    # nodes lie on a lattice of spacing h/2 in x and h*sqrt(3)/2 in y
    key = np.round(np.column_stack([flat.real, flat.imag]) / h * 8).astype(np.int64)
    _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
    nodes = flat[first]
    mask = on_outline(nodes, mesh.outline, 1e-9 * h)
    return DofMap(p, inv.reshape(pts.shape), nodes, mask)
