"""Analytic upper bounds on the eigenvalue gap between inner and outer polygons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..errors import ParameterError
from ..spectral.bessel import disk_constants


@dataclass(frozen=True)
class GapBound:
    constant_C: float
    bound: float
    level: Optional[int] = None


def pang_constant(area_H0: float, inradius_T0: float) -> float:
    """C = 2^9 j^4 S^{9/4} / (3 pi^{9/4} R^7), j the first disk eigenvalue."""
    if area_H0 <= 0 or inradius_T0 <= 0:
        raise ParameterError("area and inradius must be positive")
    j01 = disk_constants().j01_sq
    return 2**9 * j01**4 * area_H0**2.25 / (3 * math.pi**2.25 * inradius_T0**7)


def koch_constant() -> float:
    return pang_constant(1.5 * math.sqrt(3), 1.0)


def koch_gap_bound(j: int) -> GapBound:
    """j^4 3^{3/4} / (2^{5/4} pi^{9/4}) * (1/sqrt 3)^j."""
    if j < 0:
        raise ParameterError(f"level must be nonnegative, got {j}")
    j01 = disk_constants().j01_sq
    scale = j01**4 * 3**0.75 / (2**1.25 * math.pi**2.25)
    return GapBound(koch_constant(), scale * 3 ** (-j / 2), j)


def general_gap_bound(C: float, delta: float, beta0: float, ell_j: float, level=None) -> GapBound:
    """C sqrt(2 delta) / sin(beta0/2)^{1/2} * ell_j^{1/2}."""
    if C <= 0 or delta <= 0 or ell_j <= 0:
        raise ParameterError("C, delta and ell_j must be positive")
    if not math.pi < beta0 < 2 * math.pi:
        raise ParameterError(f"beta0={beta0} outside (pi, 2 pi)")
    return GapBound(C, C * math.sqrt(2 * delta) / math.sqrt(math.sin(beta0 / 2)) * math.sqrt(ell_j), level)
