"""Finite-dimensional check of the block operator E = [[0, T^T], [T, 0]].

Nonzero eigenvalues of E are exactly +/- the nonzero singular values of T,
and dim ker E = dim ker T + dim ker T^T.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OracleReport:
    shape: tuple
    pairing_error: float
    zero_multiplicity: int
    expected_zero_multiplicity: int
    tol: float
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def pairing_ok(self) -> bool:
        return self.pairing_error <= self.tol

    @property
    def multiplicity_ok(self) -> bool:
        return self.zero_multiplicity == self.expected_zero_multiplicity

    @property
    def passed(self) -> bool:
        return self.pairing_ok and self.multiplicity_ok

    def as_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "pairing_error": self.pairing_error,
            "zero_multiplicity": self.zero_multiplicity,
            "expected_zero_multiplicity": self.expected_zero_multiplicity,
            "passed": self.passed,
        }


def block_operator_oracle(T, tol: float = 1e-10) -> OracleReport:
    T = np.atleast_2d(np.asarray(T, dtype=float))
    m, n = T.shape
    E = np.block([[np.zeros((n, n)), T.T], [T, np.zeros((m, m))]])
    eig = np.linalg.eigvalsh(E)
    sv = np.linalg.svd(T, compute_uv=False)
    scale = max(1.0, float(sv.max()) if sv.size else 1.0)
    zero_tol = max(m, n) * np.finfo(float).eps * scale * 10
    rank = int(np.sum(sv > zero_tol))
    # singular values padded with zeros: E has eigenvalues +/- s_i and m + n - 2 rank zeros
    expected = np.sort(np.concatenate([sv[:rank], -sv[:rank], np.zeros(m + n - 2 * rank)]))
    pairing = float(np.max(np.abs(np.sort(eig) - expected))) / scale
    zeros = int(np.sum(np.abs(eig) <= zero_tol))
    kernel_T = n - rank
    kernel_Tt = m - rank
    return OracleReport((m, n), pairing, zeros, kernel_T + kernel_Tt, tol, eig)
