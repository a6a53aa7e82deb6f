"""Bessel functions of the first kind from the Maclaurin series, and the
unit-disk Dirichlet eigenvalues derived from their first zeros.

The series alternates with terms as large as ~1e12 near x = 30, so it is
summed in extended precision (mpmath) and rounded once at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath

from ..errors import ParameterError

X_MAX = 30.0
_DPS = 50


def bessel_j(nu: float, x: float) -> float:
    """J_nu(x) for 0 <= x <= 30 and nu >= 0, accurate to ~1e-15 absolute."""
    if nu < 0:
        raise ParameterError(f"order must be nonnegative, got {nu}")
    if not 0.0 <= x <= X_MAX:
        raise ParameterError(f"x={x} outside the series range [0, {X_MAX}]")
    return float(_series(float(nu), float(x)))


def _series(nu: float, x: float):
    with mpmath.workdps(_DPS):
        half = mpmath.mpf(x) / 2
        q = half * half
        nu_mp = mpmath.mpf(nu)
        term = 1 / mpmath.gamma(nu_mp + 1)
        total = term
        ell = 0
        # terms decay once ell exceeds x/2; stop well past machine epsilon
        while True:
            ell += 1
            term = -term * q / (ell * (nu_mp + ell))
            total += term
            if ell > x and abs(term) < mpmath.mpf(10) ** (-_DPS + 5):
                break
        if nu == 0:
            return total
        return half ** nu * total


def bisect_root(func, lo: float, hi: float, tol: float = 1e-14, max_iter: int = 200) -> float:
    flo = func(lo)
    fhi = func(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise ParameterError(f"[{lo}, {hi}] does not bracket a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = func(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def first_zero(nu: float, step: float = 0.1) -> float:
    """First positive zero of J_nu: scan for a sign change, then bisect."""
    x = step
    f_prev = bessel_j(nu, x)
    while x < X_MAX:
        x_next = x + step
        f_next = bessel_j(nu, x_next)
        if f_prev * f_next <= 0:
            return bisect_root(lambda t: bessel_j(nu, t), x, x_next)
        x, f_prev = x_next, f_next
    raise ParameterError(f"no zero of J_{nu} below {X_MAX}")


@dataclass(frozen=True)
class DiskConstants:
    j01_sq: float
    j11_sq: float

    @property
    def omega1(self) -> float:
        return math.sqrt(self.j01_sq)

    @property
    def omega2(self) -> float:
        return math.sqrt(self.j11_sq)


@lru_cache(maxsize=1)
def disk_constants() -> DiskConstants:
    """First and second Dirichlet eigenvalues of the unit disk."""
    return DiskConstants(first_zero(0.0) ** 2, first_zero(1.0) ** 2)
