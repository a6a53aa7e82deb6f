"""The composite map f_j = g_j o g_0^{-1} from a base polygon onto a level polygon.

Only |f'| enters the transplanted eigenproblem.  With xi = g_0^{-1}(z),

    |f'(z)| = |C_j / C_0| * prod |1 - (xi/xi_k)^m|^(alpha_k - 1),

where prevertex orbits shared by both maps with equal exponents cancel (the m
fixed corners), so the product runs over the free prevertices of g_j only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import hyp2f1

from ..errors import ConvergenceError, GeometryError, ParameterError
from ..geometry.polygon import Polygon, contains_points
from .sc import PrevertexSolution, sc_evaluate

SEED_GRID = 64
SEED_ANGLES = 8      # angular seeds per radial seed
NEWTON_MAX = 60


def _is_regular(sol: PrevertexSolution) -> bool:
    return sol.n == sol.symmetry and sol.n > 1


def regular_forward(sol: PrevertexSolution, xi) -> np.ndarray:
    """Closed form of g for a regular m-gon (a single prevertex orbit):

        g(xi) = A + C xi 2F1(-beta, 1/m; 1 + 1/m; (xi/xi_0)^m).
    """
    if not _is_regular(sol):
        raise ParameterError("closed form needs a map onto a regular polygon")
    m = sol.symmetry
    beta = float(sol.exponents[0])
    xi = np.asarray(xi, dtype=complex)
    t = (xi / sol.prevertices[0]) ** m
    return sol.A + sol.C * xi * hyp2f1(-beta, 1.0 / m, 1.0 + 1.0 / m, t)


@dataclass(frozen=True, eq=False)
class InverseMap:
    """g^{-1} by Newton's method seeded from a forward-evaluated polar grid."""

    sol: PrevertexSolution
    seeds_xi: np.ndarray = field(repr=False)
    seeds_z: np.ndarray = field(repr=False)
    tree: cKDTree = field(repr=False)
    scale: float = 1.0

    @classmethod
    def build(cls, sol: PrevertexSolution, grid: int = SEED_GRID) -> "InverseMap":
        # radii cluster toward the circle, where the map compresses most
        s = (np.arange(grid) + 0.5) / grid
        r = 1 - (1 - s) ** 2
        th = 2 * np.pi * np.arange(SEED_ANGLES * grid) / (SEED_ANGLES * grid)
        xi = (r[:, None] * np.exp(1j * th[None, :])).ravel()
        xi = np.concatenate([[0j], xi])
        z = _forward(sol, xi)
        tree = cKDTree(np.column_stack([z.real, z.imag]))
        scale = float(np.max(np.abs(sol.vertices - sol.vertices.mean()))) if sol.vertices is not None else 1.0
        return cls(sol, xi, z, tree, scale)

    def __call__(self, z, tol: float = 1e-13) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        sol = self.sol
        out = np.empty_like(z)
        # vertices map straight to their prevertices
        if sol.vertices is not None:
            dv = np.abs(z[:, None] - sol.vertices[None, :])
            hit = dv.min(axis=1) <= 1e-15 * self.scale
            out[hit] = sol.prevertices[dv[hit].argmin(axis=1)]
        else:
            hit = np.zeros(len(z), dtype=bool)
        todo = np.nonzero(~hit)[0]
        if len(todo):
            _, idx = self.tree.query(np.column_stack([z[todo].real, z[todo].imag]))
            out[todo] = self._newton(z[todo], self.seeds_xi[idx], tol)
        return out

    def _newton(self, z, xi, tol):
        sol = self.sol
        target = tol * self.scale
        # the closed form continues analytically across the circle away from
        # the prevertices, so iterates may leave the disk temporarily
        radius = 1.5 if _is_regular(sol) else 1.0
        res = _forward(sol, xi) - z
        err = np.abs(res)
        active = np.nonzero(err > target)[0]
        for _ in range(NEWTON_MAX):
            if not len(active):
                break
            step = res[active] / sol.derivative(xi[active])
            new = xi[active] - step
            fnew = np.full(len(active), np.nan + 0j)
            # backtrack only the points whose step leaves the disk or raises the residual
            todo = np.arange(len(active))
            for _ in range(40):
                inside = np.abs(new[todo]) < radius
                ok = todo[inside]
                fnew[ok] = _forward(sol, new[ok]) - z[active[ok]]
                worse = todo[~inside]
                worse = np.concatenate([worse, ok[np.abs(fnew[ok]) > err[active[ok]]]])
                if not len(worse):
                    break
                step[worse] /= 2
                new[worse] = xi[active[worse]] - step[worse]
                todo = worse
            else:
                # no acceptable step: keep the old iterate for these points
                new[todo] = xi[active[todo]]
                fnew[todo] = res[active[todo]]
            xi[active] = new
            res[active] = fnew
            err[active] = np.abs(fnew)
            active = active[err[active] > target]
        if len(active):
            worst = float(err[active].max())
            if worst > 1e-9 * self.scale:
                raise ConvergenceError(f"inverse map failed for {len(active)} points (residual {worst:.2e})", [worst])
        r = np.abs(xi)
        if np.any(r > 1 + 1e-9):
            raise ConvergenceError("inverse map converged outside the disk", [float(r.max())])
        return np.where(r > 1, xi / np.maximum(r, 1.0), xi)


def _forward(sol: PrevertexSolution, xi) -> np.ndarray:
    if _is_regular(sol):
        return regular_forward(sol, xi)
    return np.atleast_1d(sc_evaluate(sol, xi))


def inverse_disk_map(sol: PrevertexSolution, z, inverse: InverseMap | None = None) -> np.ndarray:
    """xi with g(xi) = z for points of the closed polygon."""
    inverse = InverseMap.build(sol) if inverse is None else inverse
    return inverse(z)


@dataclass(frozen=True, eq=False)
class CompositeMap:
    g0: PrevertexSolution
    gj: PrevertexSolution
    base: Polygon
    inverse: InverseMap = field(repr=False)
    free_xi: np.ndarray = field(repr=False)
    free_beta: np.ndarray = field(repr=False)
    base_xi: np.ndarray = field(repr=False)
    base_beta: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, g0: PrevertexSolution, gj: PrevertexSolution, base: Polygon) -> "CompositeMap":
        if g0.symmetry != gj.symmetry:
            raise ParameterError("base and level maps must share their symmetry order")
        m = g0.symmetry
        xi0, b0 = g0.sector
        xij, bj = gj.sector
        # cancel orbits shared with identical exponent
        keep_j = np.ones(len(xij), dtype=bool)
        keep_0 = np.ones(len(xi0), dtype=bool)
        for a, (x, b) in enumerate(zip(xi0, b0)):
            d = np.abs(xij - x)
            k = int(d.argmin())
            if d[k] < 1e-14 and abs(bj[k] - b) < 1e-14 and keep_j[k]:
                keep_j[k] = False
                keep_0[a] = False
        return cls(g0, gj, base, InverseMap.build(g0), xij[keep_j], bj[keep_j], xi0[keep_0], b0[keep_0])

    @property
    def symmetry(self) -> int:
        return self.g0.symmetry

    @property
    def scale(self) -> float:
        return abs(self.gj.C / self.g0.C)

    def log_abs_derivative_xi(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex)
        m = self.symmetry
        out = np.full(xi.shape, np.log(self.scale))
        if len(self.free_xi):
            t = (xi.reshape(-1, 1) / self.free_xi[None, :]) ** m
            out = out + (np.log(np.abs(1 - t)) @ self.free_beta).reshape(xi.shape)
        if len(self.base_xi):
            t = (xi.reshape(-1, 1) / self.base_xi[None, :]) ** m
            out = out - (np.log(np.abs(1 - t)) @ self.base_beta).reshape(xi.shape)
        return out

    def abs_derivative(self, z, check: bool = True) -> np.ndarray:
        """|f'(z)| for points of the open base polygon."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        if check and not np.all(contains_points(self.base, flat)):
            raise GeometryError("points must lie in the open base polygon")
        xi = self.inverse(flat)
        return np.exp(self.log_abs_derivative_xi(xi)).reshape(z.shape)

    def __call__(self, z) -> np.ndarray:
        """f(z) = g_j(g_0^{-1}(z)) (quadrature evaluation, for diagnostics)."""
        return sc_evaluate(self.gj, self.inverse(np.atleast_1d(z)))

    def fixed_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Base corners z_k and their images f(z_k)."""
        idx0 = list(self.g0.fixed_indices)
        return self.g0.vertices[idx0], sc_evaluate(self.gj, self.g0.prevertices[idx0], anchor="center")

    def singular_points(self) -> np.ndarray:
        """Points z_k = g_0(xi_k) on the base boundary where |f'| is singular."""
        m = self.symmetry
        rots = np.exp(2j * np.pi * np.arange(m) / m)
        xi = (self.free_xi[None, :] * rots[:, None]).ravel()
        return _forward(self.g0, xi), np.tile(self.free_beta, m)


def composite_derivative_abs(cmap: CompositeMap, z) -> np.ndarray:
    return cmap.abs_derivative(z)
