"""Uniform equilateral triangulations of the base triangle and hexagon."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..geometry.polygon import regular_polygon


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray          # complex, (nv,)
    triangles: np.ndarray         # int, (ne, 3), counterclockwise
    boundary_vertex_flags: np.ndarray
    refinement_level: int
    outline: np.ndarray           # corners of the meshed polygon, counterclockwise
    kind: str = ""

    @property
    def n_cells(self) -> int:
        return len(self.triangles)

    @property
    def corners(self) -> np.ndarray:
        """(ne, 3) complex coordinates of every cell."""
        return self.vertices[self.triangles]

    @property
    def areas(self) -> np.ndarray:
        c = self.corners
        e1 = c[:, 1] - c[:, 0]
        e2 = c[:, 2] - c[:, 0]
        return 0.5 * (e1.real * e2.imag - e1.imag * e2.real)

    @property
    def h(self) -> float:
        c = self.corners[0]
        return float(abs(c[1] - c[0]))

    def to_dict(self) -> dict:
        return {
            "vertices": [[float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")] for z in self.vertices],
            "triangles": self.triangles.tolist(),
            "boundary": self.boundary_vertex_flags.astype(int).tolist(),
            "refinement_level": self.refinement_level,
            "kind": self.kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def on_outline(points: np.ndarray, outline: np.ndarray, tol: float) -> np.ndarray:
    """Points lying on the boundary of the convex polygon `outline`."""
    a = outline
    b = np.roll(outline, -1)
    z = np.asarray(points)[:, None]
    d = b - a
    t = ((z - a) * np.conj(d)).real / np.abs(d) ** 2
    dist = np.abs(z - (a + np.clip(t, 0, 1) * d))
    return np.any(dist <= tol, axis=1)


def project_to_outline(points: np.ndarray, outline: np.ndarray) -> np.ndarray:
    """Nearest points on the boundary of the polygon `outline`."""
    a = outline
    b = np.roll(outline, -1)
    z = np.asarray(points, dtype=complex)[:, None]
    d = b - a
    t = np.clip(((z - a) * np.conj(d)).real / np.abs(d) ** 2, 0, 1)
    proj = a + t * d
    k = np.abs(z - proj).argmin(axis=1)
    return proj[np.arange(len(k)), k]


def _from_cells(cells: np.ndarray, outline: np.ndarray, level: int, kind: str) -> TriangleMesh:
    """Deduplicate cell corners onto a lattice and build the mesh."""
    h = abs(cells[0, 1] - cells[0, 0])
    pts = cells.ravel()
    key = np.round(np.column_stack([pts.real, pts.imag]) / h * 64).astype(np.int64)
    _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
    verts = pts[first]
    tris = inv.reshape(-1, 3)
    flags = on_outline(verts, outline, 1e-9 * h)
    return TriangleMesh(verts, tris, flags, level, outline, kind)


def _split4(cells: np.ndarray) -> np.ndarray:
    a, b, c = cells[:, 0], cells[:, 1], cells[:, 2]
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    kids = np.stack([
        np.stack([a, ab, ca], 1),
        np.stack([ab, b, bc], 1),
        np.stack([ca, bc, c], 1),
        np.stack([bc, ca, ab], 1),
    ], 1)
    return kids.reshape(-1, 3)


def initial_mesh(kind: str, scale: float = 1.0) -> TriangleMesh:
    """triangle: T_0 split into 4 cells; hexagon: H_0 split into 6 (scaled by `scale`)."""
    if kind == "triangle":
        V = scale * regular_polygon(3)
        cells = _split4(V[None, :])
    elif kind == "hexagon":
        V = scale * regular_polygon(6)
        cells = np.array([[0, V[k], V[(k + 1) % 6]] for k in range(6)], dtype=complex)
    else:
        raise ConfigError(f"unknown mesh kind {kind!r}")
    return _from_cells(cells, V, 0, kind)


def refine(mesh: TriangleMesh) -> TriangleMesh:
    """Split every cell into 4 congruent children."""
    return _from_cells(_split4(mesh.corners), mesh.outline, mesh.refinement_level + 1, mesh.kind)


def uniform_mesh(kind: str, refinements: int, scale: float = 1.0) -> TriangleMesh:
    mesh = initial_mesh(kind, scale)
    for _ in range(refinements):
        mesh = refine(mesh)
    return mesh
