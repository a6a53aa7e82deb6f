"""Corner expansion of an eigenfunction near a vertex of angle alpha*pi.

In a sector of radius R around the vertex,

    u(r, theta) = sum_n a_n J_{n/alpha}(|omega| r) sin(n theta / alpha),

so a_n = 2 / (alpha pi J_{n/alpha}(|omega| R)) int_0^{alpha pi} u(R, theta) sin(n theta/alpha) dtheta.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .bessel import bessel_j


def sample_angles(alpha: float, n_samples: int) -> np.ndarray:
    """Midpoint angles in (0, alpha*pi) at which samples are expected."""
    return alpha * np.pi * (np.arange(n_samples) + 0.5) / n_samples


def local_mode_coefficients(alpha: float, omega: float, R: float, boundary_samples, n_modes: int | None = None,
                            vertex_clearance: float | None = None) -> np.ndarray:
    """a_1..a_N from samples of u(R, theta) at `sample_angles(alpha, len(samples))`.

    `boundary_samples` may also be a callable u(theta).  The midpoint rule is
    exact for the sine products up to n < len(samples) (discrete orthogonality).
    """
    if not 0 < alpha < 2:
        raise ParameterError("alpha must lie in (0, 2)")
    w = abs(omega)
    if not 0 < R < np.pi / (2 * w if w else np.inf) or (vertex_clearance is not None and R >= vertex_clearance):
        raise ParameterError("R must satisfy 0 < R < pi/(2|omega|) and stay below the distance to other vertices")
    if callable(boundary_samples):
        n_s = 4 * (n_modes or 16)
        u = np.asarray(boundary_samples(sample_angles(alpha, n_s)), dtype=float)
    else:
        u = np.asarray(boundary_samples, dtype=float)
        n_s = len(u)
    n_modes = n_modes or n_s // 2
    if n_modes >= n_s:
        raise ParameterError("need more samples than modes")
    theta = sample_angles(alpha, n_s)
    h = alpha * np.pi / n_s
    out = np.empty(n_modes)
    for n in range(1, n_modes + 1):
        integral = h * float(np.sum(u * np.sin(n * theta / alpha)))
        jn = bessel_j(n / alpha, w * R)
        out[n - 1] = 2 * integral / (alpha * np.pi * jn)
    return out
