"""Second-order spectrum: roots of det(K - 2z L + z^2 M) = 0.

Linearization: with y = z x,

    [[0, I], [-K, 2L]] [x; y] = z [[I, 0], [0, M]] [x; y].

Small pencils are solved densely (all 2d points).  Large ones use shift and
invert about a real shift sigma, where

    (A - sigma B)^{-1} B [x1; x2] = [u; x1 + sigma u],
    u = -Q(sigma)^{-1} (M x2 - (2L - sigma M) x1),

so only the d x d matrix Q(sigma) is factorized.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from ..errors import NumericalError

log = logging.getLogger(__name__)

DENSE_LIMIT = 600
RESIDUAL_TOL = 1e-8


@dataclass
class SecondOrderSpectrum:
    points: np.ndarray
    vectors: np.ndarray | None = field(default=None, repr=False)
    residuals: np.ndarray | None = None
    flagged: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def upper_half(self) -> np.ndarray:
        """One representative per conjugate pair (Im >= 0)."""
        pts = self.points
        return pts[pts.imag >= -1e-12 * np.maximum(1, np.abs(pts))]

    def is_conjugate_symmetric(self, tol: float = 1e-9) -> bool:
        pts = self.points
        for z in pts:
            if np.min(np.abs(pts - np.conj(z))) > tol * max(1.0, abs(z)):
                return False
        return True


def _norm1(A) -> float:
    return float(sla.norm(A, 1)) if sp.issparse(A) else float(np.linalg.norm(A, 1))


def qep_residuals(K, L, M, points, vectors) -> tuple[np.ndarray, np.ndarray]:
    """Relative residuals |Q(z)x| / (|x| (|K| + |z||L| + |z|^2|M|)) in the 1-norm."""
    nK, nL, nM = _norm1(K), _norm1(L), _norm1(M)
    res = np.empty(len(points))
    for i, (z, x) in enumerate(zip(points, vectors.T)):
        r = K @ x - 2 * z * (L @ x) + z * z * (M @ x)
        scale = (nK + 2 * abs(z) * nL + abs(z) ** 2 * nM) * np.linalg.norm(x, 1)
        res[i] = np.linalg.norm(r, 1) / scale if scale else 0.0
    return res, res > RESIDUAL_TOL


def _dense(K, L, M):
    K, L, M = (A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float) for A in (K, L, M))
    d = K.shape[0]
    I = np.eye(d)
    Z = np.zeros((d, d))
    A = np.block([[Z, I], [-K, 2 * L]])
    B = np.block([[I, Z], [Z, M]])
    vals, vecs = la.eig(A, B)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("dense linearized solve produced infinite eigenvalues (M singular?)")
    return vals, vecs[:d]


class _Factor:
    """LU of Q(sigma); PARDISO when available, else SuperLU."""

    def __init__(self, Q):
        self.kind = "splu"
        self._pardiso = None
        try:
            os.environ.setdefault("PYPARDISO_MKL_RT", "/usr/local/lib/libmkl_rt.so.3")
            import pypardiso

            solver = pypardiso.PyPardisoSolver()
            solver.set_iparm(1, 1)
            Qr = sp.csr_matrix(Q)
            solver.factorize(Qr)
            self._pardiso = (solver, Qr)
            self.kind = "pardiso"
        except Exception as exc:  # missing library or MKL runtime
            log.debug("PARDISO unavailable (%s); using SuperLU", exc)
            self._lu = sla.splu(sp.csc_matrix(Q))

    def solve(self, b):
        if self._pardiso is not None:
            solver, Q = self._pardiso
            return solver.solve(Q, b)
        return self._lu.solve(b)

    def free(self):
        if self._pardiso is not None:
            self._pardiso[0].free_memory(everything=True)
            self._pardiso = None


def _shift_invert(K, L, M, sigma: float, k: int, tol: float):
    d = K.shape[0]
    Q = (K - 2 * sigma * L + sigma ** 2 * M).tocsr()
    fac = _Factor(Q)
    A2 = (2 * L - sigma * M).tocsr()
    M = M.tocsr()

    def op(x):
        x1 = x[:d]
        x2 = x[d:]
        u = -fac.solve(M @ x2 - A2 @ x1)
        return np.concatenate([u, x1 + sigma * u])

    OP = sla.LinearOperator((2 * d, 2 * d), matvec=op, dtype=float)
    # fixed start vector keeps runs reproducible
    v0 = np.random.default_rng(0).standard_normal(2 * d)
    try:
        mu, vecs = sla.eigs(OP, k=k, which="LM", v0=v0, tol=tol)
    except sla.ArpackNoConvergence as exc:
        raise NumericalError(f"shift-invert eigensolve did not converge: {exc}") from exc
    finally:
        fac.free()
    return sigma + 1 / mu, vecs[:d], fac.kind


def _complete_conjugates(points, vectors):
    """Add missing conjugates (exact for a real pencil)."""
    pts = list(points)
    vecs = list(vectors.T)
    for z, x in zip(points, vectors.T):
        if abs(z.imag) > 1e-12 * max(1.0, abs(z)):
            if np.min(np.abs(np.array(pts) - np.conj(z))) > 1e-9 * max(1.0, abs(z)):
                pts.append(np.conj(z))
                vecs.append(np.conj(x))
    return np.array(pts), np.array(vecs).T


def solve_qep(pencil=None, *, K=None, L=None, M=None, sigma: float | None = None, k: int = 6,
              tol: float = 0.0, dense: bool | None = None) -> SecondOrderSpectrum:
    """Second-order spectrum of a pencil (all points if dense, else k near `sigma`)."""
    if pencil is not None:
        K, L, M = pencil.K, pencil.L, pencil.M
    d = K.shape[0]
    dense = d <= DENSE_LIMIT if dense is None else dense
    meta = {"linearization": "companion [[0,I],[-K,2L]] vs diag(I,M)", "dimension": d}
    if dense:
        points, vectors = _dense(K, L, M)
        meta["method"] = "dense QZ"
    else:
        if sigma is None:
            raise NumericalError("a shift is required for large pencils")
        k = min(k, 2 * d - 2)
        points, vectors, kind = _shift_invert(sp.csr_matrix(K), sp.csr_matrix(L), sp.csr_matrix(M), float(sigma), k, tol)
        points, vectors = _complete_conjugates(points, vectors)
        meta.update(method="shift-invert ARPACK", shift=float(sigma), factorization=kind, requested=k)
    res, flagged = qep_residuals(K, L, M, points, vectors)
    if flagged.any():
        log.info("%d second-order spectrum points exceed the residual tolerance", int(flagged.sum()))
    order = np.lexsort((points.imag, points.real))
    return SecondOrderSpectrum(points[order], vectors[:, order], res[order], flagged[order], meta)


def ground_shift(pencil, b: float | None = None) -> float:
    """Estimate omega_1 from the weighted Laplacian block (v only)."""
    nv = pencil.dofmap.n_v
    S = pencil.K[:nv, :nv].tocsc()
    Mw = pencil.M[:nv, :nv].tocsc()
    vals = sla.eigsh(S, k=1, M=Mw, sigma=0, which="LM", return_eigenvectors=False,
                     v0=np.ones(nv))
    return float(np.sqrt(vals[0]))
