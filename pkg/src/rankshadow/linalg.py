"""Dense symmetric kernels: eigendecomposition, square roots, pseudoinverse, rank."""

from __future__ import annotations

import numpy as np

from .errors import NotPSD

DEFAULT_TOL = 1e-8


def as_sym(m) -> np.ndarray:
    """Float copy of ``m`` with exact symmetry (upper triangle mirrored)."""
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    iu = np.triu_indices(a.shape[0], 1)
    a.T[iu] = a[iu]
    return a


def symmetrize(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def eig_sym(m) -> tuple:
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""
    a = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    w, v = np.linalg.eigh(symmetrize(a))
    return w[::-1].copy(), v[:, ::-1].copy()


def require_psd_spectrum(w: np.ndarray, tol: float) -> None:
    """Raise :class:`NotPSD` if descending spectrum ``w`` dips below ``-tol * lambda_max``."""
    if w.size == 0:
        return
    scale = max(w[0], 0.0)
    if w[-1] < -tol * max(scale, np.finfo(float).tiny):
        if scale == 0.0 and w[-1] > -tol:
            return
        raise NotPSD(w[-1])


def is_psd(m, tol: float = DEFAULT_TOL) -> bool:
    w, _ = eig_sym(m)
    try:
        require_psd_spectrum(w, tol)
    except NotPSD:
        return False
    return True


def psd_factor(m, tol: float = DEFAULT_TOL, width: int | None = None) -> np.ndarray:
    """Rank-truncated factor ``F`` (n x width) with ``F @ F.T ~= m``.

    Columns beyond the numerical rank are zero when ``width`` exceeds it.
    """
    w, v = eig_sym(m)
    require_psd_spectrum(w, tol)
    rank = int(np.sum(w > tol * max(w[0], 0.0))) if w.size and w[0] > 0 else 0
    width = rank if width is None else width
    if width < rank:
        raise ValueError(f"width {width} below numerical rank {rank}")
    f = np.zeros((w.size, width))
    f[:, :rank] = v[:, :rank] * np.sqrt(w[:rank])
    return f


def psd_sqrt(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Unique PSD square root; raises :class:`NotPSD` below ``-tol * lambda_max``."""
    w, v = eig_sym(m)
    require_psd_spectrum(w, tol)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return symmetrize(root)


def pinv_sym(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric matrix via its eigendecomposition."""
    w, v = eig_sym(m)
    if w.size == 0:
        return np.zeros((0, 0))
    cutoff = tol * np.max(np.abs(w))
    keep = np.abs(w) > cutoff
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return symmetrize((v * inv) @ v.T)


def rank_eps(m, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol * sigma_max`` (0 for the zero matrix)."""
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def full_rank_decompose(b, tol: float = DEFAULT_TOL) -> tuple:
    """``B = P @ Q.T`` with inner dimension ``rank_eps(B)``.

    The singular values are split evenly: ``P = U sqrt(S)``, ``Q = V sqrt(S)``.
    """
    b = np.atleast_2d(np.asarray(b, dtype=float))
    p_rows, q_rows = b.shape
    if b.size == 0:
        return np.zeros((p_rows, 0)), np.zeros((q_rows, 0))
    u, s, vt = np.linalg.svd(b, full_matrices=False)
    rho = int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
    root = np.sqrt(s[:rho])
    return u[:, :rho] * root, vt[:rho].T * root


def lambda_min_ratio(m) -> float:
    """``lambda_min / max(lambda_max, tiny)``; negative values measure PSD violation."""
    w, _ = eig_sym(m)
    return float(w[-1] / max(abs(w[0]), np.finfo(float).tiny))
