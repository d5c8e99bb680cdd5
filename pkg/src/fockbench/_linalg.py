"""Shared dense-linear-algebra helpers: thresholded ranks, kernels, PSD roots.

All rank decisions in the package go through these functions so the tolerance
convention (relative threshold, strictly-greater-than tie break) is applied
uniformly.
"""

from __future__ import annotations

import numpy as np

RANK_TOL = 1e-10
HERM_HARD_TOL = 1e-8


def op_norm(M) -> float:
    """Operator (spectral) norm; 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def fro_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M)))


def herm_residual(M) -> float:
    """Relative deviation of M from its Hermitian part."""
    M = np.asarray(M)
    scale = max(1.0, fro_norm(M))
    return fro_norm(M - M.conj().T) / scale


def hermitize(M, hard_tol: float = HERM_HARD_TOL):
    """Return the Hermitian part of M; raise when asymmetry exceeds hard_tol."""
    M = np.asarray(M, dtype=complex)
    res = herm_residual(M)
    if res > hard_tol:
        raise ValueError(f"matrix is not Hermitian (relative asymmetry {res:.3e})")
    return (M + M.conj().T) / 2.0


def eigh_ranked(M, rank_tol: float = RANK_TOL):
    """Eigendecomposition of a Hermitian matrix plus the kept-eigenvalue mask.

    Kept are the eigenvalues strictly greater than rank_tol times the largest
    one (so PSD matrices keep exactly their numerical support).
    """
    M = np.asarray(M, dtype=complex)
    if M.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex), np.zeros(0, dtype=bool)
    w, U = np.linalg.eigh(M)
    wmax = max(float(w.max()), 0.0)
    kept = w > rank_tol * wmax if wmax > 0 else np.zeros_like(w, dtype=bool)
    return w, U, kept


def psd_sqrt(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    """PSD square root via eigendecomposition, sub-threshold eigenvalues clamped to 0."""
    w, U, kept = eigh_ranked(M, rank_tol)
    s = np.where(kept, np.sqrt(np.clip(w, 0.0, None)), 0.0)
    return (U * s) @ U.conj().T


def pinv_tol(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with relative singular-value cutoff."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]), dtype=complex)
    return np.linalg.pinv(M, rcond=rank_tol)


def matrix_rank(M, rank_tol: float = RANK_TOL) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def kernel_onb(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of M."""
    M = np.asarray(M, dtype=complex)
    cols = M.shape[1]
    if M.size == 0:
        return np.eye(cols, dtype=complex)
    _, s, Vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    r = int(np.count_nonzero(s > rank_tol * smax)) if smax > 0 else 0
    return Vh[r:].conj().T


def range_onb(M, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical range of M."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    r = int(np.count_nonzero(s > rank_tol * smax)) if smax > 0 else 0
    return U[:, :r]
