"""Meshes, Lagrange spaces and pencil assembly on the base polygon."""

from .assemble import MapWeight, QuadraticPencil, UnitWeight, assemble_pencil, weight_integral
from .lagrange import DofMap, basis, build_dofmap, lattice
from .mesh import TriangleMesh, initial_mesh, refine, uniform_mesh
from .quadrature import TriangleRule, corner_rule, quadrature_rule, singular_cell_rule

__all__ = [
    "DofMap", "MapWeight", "QuadraticPencil", "TriangleMesh", "TriangleRule", "UnitWeight",
    "assemble_pencil", "basis", "build_dofmap", "corner_rule", "initial_mesh", "lattice",
    "quadrature_rule", "refine", "singular_cell_rule", "uniform_mesh", "weight_integral",
]
