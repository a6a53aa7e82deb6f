"""Corner exponents of the composite map and of transplanted eigenfunctions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ParameterError
from ..geometry.polygon import Polygon


@dataclass(frozen=True)
class SingularityExponent:
    vertex_index: int
    alpha: float
    beta: float

    @property
    def map_exponent(self) -> float:
        """f(z) - w_k ~ (z - z_k)^(alpha - beta + 1)."""
        return self.alpha - self.beta + 1

    @property
    def inverse_derivative_exponent(self) -> float:
        """|f'(z)|^{-1} ~ |z - z_k|^(beta - alpha)."""
        return self.beta - self.alpha

    @property
    def assumption_b(self) -> bool:
        return self.alpha - self.beta < 1


def singularity_exponents(base: Polygon, target: Polygon, matching: dict) -> list[SingularityExponent]:
    """Exponents per target vertex.

    `matching` maps target vertex indices to base vertex indices; unmatched
    target vertices sit on a straight part of the base boundary (beta = 1).
    """
    out = []
    for k, alpha in enumerate(target.angle_fractions):
        if k in matching:
            b = matching[k]
            if not 0 <= b < base.n:
                raise ParameterError(f"base vertex {b} out of range")
            beta = float(base.angle_fractions[b])
        else:
            beta = 1.0
        out.append(SingularityExponent(k, float(alpha), beta))
    return out


def assumption_b(exponents) -> bool:
    return all(e.assumption_b for e in exponents)


def koch_matching(kind: str, n: int) -> dict:
    """Target index -> base corner for the Koch T (m=3) or H (m=6) family."""
    m = 3 if kind.upper() == "T" else 6
    return {r * (n // m): r for r in range(m)}


@dataclass(frozen=True)
class SingularityRow:
    family: str
    vertices: str
    alpha: Fraction
    leading_power: Fraction
    remainder_power: Fraction


_TABLE = {
    "T": [
        ("k<=3", Fraction(1, 3), Fraction(3), Fraction(5)),
        ("k>3", Fraction(1, 3), Fraction(1), Fraction(5, 3)),
        ("k>3", Fraction(4, 3), Fraction(1), Fraction(2)),
    ],
    "H": [
        ("k<=6", Fraction(2, 3), Fraction(3, 2), Fraction(3)),
        ("k>6", Fraction(2, 3), Fraction(1), Fraction(2)),
        ("k>6", Fraction(5, 3), Fraction(1), Fraction(2)),
    ],
}


def transplanted_singularity_table(family: str) -> list[SingularityRow]:
    """Leading powers of a transplanted Koch eigenfunction v(y) ~ b(phi) rho^p.

    At the fixed corners v inherits the corner singularity of the eigenfunction
    itself; at every other vertex the transplantation straightens the corner
    and v vanishes linearly.
    """
    key = family.upper()
    if key not in _TABLE:
        raise ParameterError(f"family must be 'T' or 'H', got {family!r}")
    return [SingularityRow(key, v, a, p, r) for v, a, p, r in _TABLE[key]]


def fixed_corner_power(alpha: float) -> float:
    """Leading power pi/(alpha pi) of the eigenfunction at a corner of angle alpha*pi."""
    return float(np.round(1.0 / alpha, 12))
