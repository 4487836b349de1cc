"""Dense complex matrix services: Hermitian eigensolver, matrix exponential, rank.

Thin wrappers around numpy/scipy kept behind a stable interface so that every
caller in the package shares one set of tolerances and error types.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericOverflowError

HERMITIAN_TOL = 1e-10


def hermiticity_deviation(m: np.ndarray) -> float:
    """max |M - M^dagger|, zero for exactly Hermitian input."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_eigen(m: np.ndarray):
    """Eigendecomposition of (the symmetrization of) a Hermitian-candidate matrix.

    Returns (eigenvalues ascending, eigenvector columns).
    """
    m = np.asarray(m, dtype=complex)
    sym = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(sym)
    return vals, vecs


def mat_exp(m: np.ndarray) -> np.ndarray:
    """exp(M) for a dense complex square matrix.

    Hermitian inputs go through the eigendecomposition; everything else uses
    scipy's scaling-and-squaring Pade approximant.
    """
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return m.copy()
    scale = max(1.0, float(np.max(np.abs(m))))
    with np.errstate(over="ignore", invalid="ignore"):
        if hermiticity_deviation(m) <= HERMITIAN_TOL * scale:
            vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
            out = (vecs * np.exp(vals)) @ vecs.conj().T
        else:
            out = scipy.linalg.expm(m)
    if not np.all(np.isfinite(out)):
        raise NumericOverflowError("matrix exponential overflowed")
    return out


def rank(m: np.ndarray, tol: float = 1e-9) -> int:
    """Number of singular values above tol * max(1, largest singular value)."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0
    svals = np.linalg.svd(m, compute_uv=False)
    cutoff = tol * max(1.0, float(svals[0]))
    return int(np.sum(svals > cutoff))
