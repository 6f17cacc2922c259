"""Gram matrices, empirical second moments, and the symmetric PSD square root."""

from __future__ import annotations

import numpy as np

from .tokenio import validate_matrix

#: Most negative eigenvalue accepted on nominally-PSD input (float noise).
PSD_EIG_TOL = 1e-8


def gram(V: np.ndarray) -> np.ndarray:
    """Row-interaction matrix V V^T; entry (i, j) = <row_i, row_j>."""
    V = validate_matrix(V)
    G = V @ V.T
    return 0.5 * (G + G.T)


def covariance(V: np.ndarray) -> np.ndarray:
    """Empirical second moment V^T V / m (zero-mean convention).

    For a subset, pass the k-row submatrix; the divisor is then k.
    """
    V = validate_matrix(V)
    m = V.shape[0]
    C = (V.T @ V) / m
    return 0.5 * (C + C.T)


def check_symmetric(X: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Symmetrize X after checking asymmetry stays below tol * max(1, |X|_max)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    scale = max(1.0, float(np.abs(X).max())) if X.size else 1.0
    asym = float(np.abs(X - X.T).max()) if X.size else 0.0
    if asym > tol * scale:
        raise ValueError(f"matrix is not symmetric: max asymmetry {asym:g}")
    return 0.5 * (X + X.T)


def psd_eigvalsh(X: np.ndarray, eig_tol: float = PSD_EIG_TOL) -> np.ndarray:
    """Eigenvalues of a symmetric PSD matrix, ascending, negatives clipped to 0.

    Raises if any eigenvalue is below -eig_tol * max(1, |X|_max): the input is
    then genuinely indefinite, not just noisy.
    """
    X = check_symmetric(X)
    w = np.linalg.eigvalsh(X)
    scale = max(1.0, float(np.abs(X).max()))
    if w[0] < -eig_tol * scale:
        raise ValueError(f"matrix is not PSD: minimum eigenvalue {w[0]:g}")
    return np.clip(w, 0.0, None)


def sqrt_psd(X: np.ndarray, eig_tol: float = PSD_EIG_TOL) -> np.ndarray:
    """Symmetric PSD square root Y with Y @ Y = X.

    Computed by symmetric eigendecomposition with negative eigenvalues
    (float noise on a PSD input) clipped to zero.
    """
    X = check_symmetric(X)
    w, Q = np.linalg.eigh(X)
    scale = max(1.0, float(np.abs(X).max()))
    if w[0] < -eig_tol * scale:
        raise ValueError(f"matrix is not PSD: minimum eigenvalue {w[0]:g}")
    Y = (Q * np.sqrt(np.clip(w, 0.0, None))) @ Q.T
    return 0.5 * (Y + Y.T)
