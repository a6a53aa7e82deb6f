"""Eigenvalue enclosures from points of the second-order spectrum.

If (a, b) contains exactly one eigenvalue omega of the grad-div system and
lambda lies in the disk with diameter [a, b], then

    Re l - Im(l)^2 / (b - Re l) <= omega <= Re l + Im(l)^2 / (Re l - a).
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ParameterError, ResolutionError
from .bessel import disk_constants

log = logging.getLogger(__name__)

B_FACTOR = 0.995


def default_b() -> float:
    """0.995 * omega_2(unit disk); valid for every domain inside the unit disk."""
    return B_FACTOR * disk_constants().omega2


@dataclass(frozen=True)
class Enclosure:
    lower: float
    upper: float
    lambda_re: float
    lambda_im: float
    a: float
    b: float
    level: int | None = None
    domain: str = ""
    p: int | None = None
    refinement: int | None = None

    @property
    def sq_lower(self) -> float:
        return self.lower ** 2

    @property
    def sq_upper(self) -> float:
        return self.upper ** 2

    @property
    def width(self) -> float:
        return self.sq_upper - self.sq_lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.sq_upper + self.sq_lower)

    def contains(self, omega_sq: float) -> bool:
        return self.sq_lower <= omega_sq <= self.sq_upper

    def as_row(self) -> dict:
        return {
            "domain": self.domain,
            "j": self.level,
            "p": self.p,
            "refinement": self.refinement,
            "lambda": [self.lambda_re, self.lambda_im],
            "a": self.a,
            "b": self.b,
            "omega_lower": self.lower,
            "omega_upper": self.upper,
            "omega_sq_lower": self.sq_lower,
            "omega_sq_upper": self.sq_upper,
        }

    @classmethod
    def from_row(cls, row: dict) -> "Enclosure":
        return cls(row["omega_lower"], row["omega_upper"], row["lambda"][0], row["lambda"][1],
                   row["a"], row["b"], row.get("j"), row.get("domain", ""), row.get("p"), row.get("refinement"))

    def to_json(self) -> str:
        return json.dumps(self.as_row())

    def with_context(self, **kw) -> "Enclosure":
        d = asdict(self)
        d.update(kw)
        return Enclosure(**d)


def in_disk(lam: complex, a: float, b: float) -> bool:
    return abs(lam - 0.5 * (a + b)) < 0.5 * (b - a)


def enclosure_from_point(lam: complex, a: float, b: float) -> Enclosure:
    lam = complex(lam)
    if not a < b:
        raise ParameterError("need a < b")
    if not in_disk(lam, a, b):
        raise ParameterError(f"lambda={lam} lies outside the disk D({a}, {b})")
    re, im2 = lam.real, lam.imag ** 2
    lower = re - im2 / (b - re)
    upper = re + im2 / (re - a)
    return Enclosure(lower, upper, re, abs(lam.imag), a, b)


def select_ground_point(points, a: float, b: float) -> complex:
    """Point of smallest |Im| among those in D(a, b) with Re > 0."""
    pts = np.asarray(getattr(points, "points", points), dtype=complex)
    cand = [z for z in pts if z.imag >= 0 and z.real > 0 and in_disk(z, a, b)]
    if not cand:
        raise ResolutionError(f"no second-order spectrum point in D({a}, {b}); refine the mesh")
    cand.sort(key=lambda z: abs(z.imag))
    # a second pair far from the first suggests another eigenvalue in (a, b)
    distinct = [z for z in cand[1:] if abs(z - cand[0]) > 1e-6 * abs(cand[0])]
    if distinct:
        msg = f"{1 + len(distinct)} conjugate pairs lie in D({a}, {b}); using the one with smallest |Im|"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        log.warning(msg)
    return complex(cand[0])
