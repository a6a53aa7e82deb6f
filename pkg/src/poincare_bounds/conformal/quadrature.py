"""Gauss-Jacobi rules on [-1, 1] for weights (1-x)^a (1+x)^b."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

DEFAULT_NODES = 24


@lru_cache(maxsize=256)
def gauss_jacobi(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the weight (1-x)^a (1+x)^b, a, b > -1."""
    # rounding keys the cache on the exponent rather than its float noise
    x, w = roots_jacobi(n, round(a, 14), round(b, 14))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=16)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
