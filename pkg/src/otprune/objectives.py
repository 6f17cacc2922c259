"""Objective functions over row subsets of a token matrix.

Conventions shared by every evaluator here:

* ``sigma``   -- full second moment V^T V / m.
* ``sigma_c`` -- subset second moment V_C^T V_C / k, divisor k = |C|.
* ``gamma``   -- scale of the log-det operator applied in covariance space.
* ``gamma_tilde`` -- the equivalent kernel-space scale gamma / (m * k);
  with these divisors the covariance form logdet(I + gamma * S Sigma_C S)
  and the kernel form logdet(I + gamma_tilde * W_C W_C^T), W_C = V_C V^T,
  are equal exactly (determinant identity for I + X X^T vs I + X^T X).

The empty subset is worth 0 under both log-det forms (normalized set
function); the trace and Wasserstein evaluators require a nonempty subset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import covariance, check_symmetric, psd_eigvalsh, sqrt_psd
from .tokenio import validate_matrix

DEFAULT_GAMMA = 0.01

#: Subset objective kinds accepted by the oracle and bench layers.
SUBSET_OBJECTIVE_KINDS = ("wasserstein2_sq", "trace_f", "logdet_surrogate", "kernel_logdet")

#: Kinds where larger values mean better subsets (wasserstein2_sq is a distance).
_HIGHER_IS_BETTER = {
    "wasserstein2_sq": False,
    "trace_f": True,
    "logdet_surrogate": True,
    "kernel_logdet": True,
}


def check_subset(C, m: int, allow_empty: bool = False) -> np.ndarray:
    """Validate subset indices: integer, distinct, in [0, m). Keeps order."""
    idx = np.asarray(list(C), dtype=np.intp)
    if idx.ndim != 1:
        raise ValueError("subset must be a flat sequence of indices")
    if idx.size == 0:
        if allow_empty:
            return idx
        raise ValueError("subset must be nonempty")
    if idx.min() < 0 or idx.max() >= m:
        bad = idx[(idx < 0) | (idx >= m)][0]
        raise ValueError(f"subset index {bad} out of range [0, {m})")
    if np.unique(idx).size != idx.size:
        raise ValueError("subset contains duplicate indices")
    return idx


@dataclass(frozen=True)
class ObjectiveSpec:
    """A subset objective: kind plus its scale parameter.

    ``gamma`` feeds the covariance-space operator; the kernel form derives
    gamma_tilde = gamma / (m * k) unless ``gamma_tilde`` pins it directly.
    """

    kind: str
    gamma: float | None = None
    gamma_tilde: float | None = None

    def __post_init__(self):
        if self.kind not in SUBSET_OBJECTIVE_KINDS:
            raise ValueError(
                f"unknown objective kind {self.kind!r}; expected one of {SUBSET_OBJECTIVE_KINDS}"
            )
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.gamma_tilde is not None and not self.gamma_tilde > 0:
            raise ValueError("gamma_tilde must be positive")

    @property
    def higher_is_better(self) -> bool:
        return _HIGHER_IS_BETTER[self.kind]

    def effective_gamma(self) -> float:
        return DEFAULT_GAMMA if self.gamma is None else self.gamma

    def effective_gamma_tilde(self, m: int, k: int) -> float:
        if self.gamma_tilde is not None:
            return self.gamma_tilde
        return self.effective_gamma() / (m * k)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.gamma_tilde is not None:
            out["gamma_tilde"] = self.gamma_tilde
        return out


def psi(X: np.ndarray, gamma: float) -> float:
    """Scaled log-det operator logdet(I + gamma X) = sum_i log(1 + gamma lambda_i).

    X must be symmetric PSD up to float noise. Lower-bounds gamma * tr(X),
    which in turn lower-bounds gamma * tr(X^{1/2})^2; the first bound
    tightens as gamma -> 0.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    lam = psd_eigvalsh(X)
    return float(np.log1p(gamma * lam).sum())


def wasserstein2_gaussian(sigma: np.ndarray, sigma_c: np.ndarray) -> float:
    """Closed-form squared 2-Wasserstein distance between zero-mean Gaussians.

    tr(sigma) + tr(sigma_c) - 2 tr((sigma^{1/2} sigma_c sigma^{1/2})^{1/2});
    symmetric in its arguments and zero when they coincide.
    """
    A = check_symmetric(sigma)
    B = check_symmetric(sigma_c)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    S = sqrt_psd(A)
    cross = np.sqrt(psd_eigvalsh(S @ B @ S)).sum()
    return float(np.trace(A) + np.trace(B) - 2.0 * cross)


def trace_objective(V: np.ndarray, C) -> float:
    """Alignment term f(C) = tr((sigma^{1/2} sigma_C sigma^{1/2})^{1/2}).

    Maximizing f minimizes the Gaussian squared 2-Wasserstein distance; the
    full subset attains f = tr(sigma) exactly.
    """
    V = validate_matrix(V)
    idx = check_subset(C, V.shape[0])
    return float(subset_evaluator(V, ObjectiveSpec("trace_f"), idx.size)(idx[None, :])[0])


def logdet_surrogate(V: np.ndarray, C, gamma: float = DEFAULT_GAMMA) -> float:
    """Covariance-form surrogate logdet(I + gamma sigma^{1/2} sigma_C sigma^{1/2}).

    Equals ``kernel_logdet(V, C, gamma / (m * |C|))`` up to float noise.
    The empty subset scores 0.
    """
    V = validate_matrix(V)
    idx = check_subset(C, V.shape[0], allow_empty=True)
    if idx.size == 0:
        return 0.0
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    spec = ObjectiveSpec("logdet_surrogate", gamma=gamma)
    return float(subset_evaluator(V, spec, idx.size)(idx[None, :])[0])


def kernel_logdet(V: np.ndarray, C, gamma_tilde: float) -> float:
    """Kernel-form objective logdet(I + gamma_tilde W_C W_C^T), W_C = V_C V^T.

    The |C| x |C| matrix is symmetric positive definite, so the value is
    finite and >= 0; the empty subset scores 0.
    """
    V = validate_matrix(V)
    idx = check_subset(C, V.shape[0], allow_empty=True)
    if idx.size == 0:
        return 0.0
    if not gamma_tilde > 0:
        raise ValueError("gamma_tilde must be positive")
    B = V[idx] @ V.T
    M = np.eye(idx.size) + gamma_tilde * (B @ B.T)
    return _chol_logdet(0.5 * (M + M.T))


def _chol_logdet(M: np.ndarray) -> float:
    """log det of an SPD matrix via Cholesky."""
    L = np.linalg.cholesky(M)
    return float(2.0 * np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum(-1))


def subset_evaluator(V: np.ndarray, spec: ObjectiveSpec, k: int):
    """Build a batch evaluator f(subsets) -> values for size-k subsets of rows of V.

    ``subsets`` is an (n, k) integer array; the return is an (n,) float array.
    All per-subset arithmetic is a pure function of (V, spec, k), so chunked
    or parallel enumeration reproduces sequential results bit-for-bit.
    """
    V = validate_matrix(V)
    m, d = V.shape
    if not 1 <= k <= m:
        raise ValueError(f"subset size k={k} out of range [1, {m}]")

    if spec.kind in ("trace_f", "logdet_surrogate", "wasserstein2_sq"):
        S = sqrt_psd(covariance(V))
        VS = V @ S

        def gram_eigs(idx: np.ndarray) -> np.ndarray:
            # eigenvalues of sigma^{1/2} sigma_C sigma^{1/2} via the smaller
            # Gram side of A = V_C S (nonzero spectra coincide, zeros add 0)
            A = VS[idx]
            if k <= d:
                X = A @ A.swapaxes(-1, -2)
            else:
                X = A.swapaxes(-1, -2) @ A
            X = 0.5 * (X + X.swapaxes(-1, -2))
            return np.clip(np.linalg.eigvalsh(X / k), 0.0, None)

        if spec.kind == "trace_f":
            return lambda idx: np.sqrt(gram_eigs(np.asarray(idx))).sum(-1)

        if spec.kind == "logdet_surrogate":
            g = spec.effective_gamma()
            return lambda idx: np.log1p(g * gram_eigs(np.asarray(idx))).sum(-1)

        # wasserstein2_sq: tr(sigma) + tr(sigma_C) - 2 f(C)
        tr_sigma = float(np.trace(covariance(V)))
        row_sq = np.einsum("ij,ij->i", V, V)

        def w2(idx: np.ndarray) -> np.ndarray:
            idx = np.asarray(idx)
            tr_c = row_sq[idx].sum(-1) / k
            f = np.sqrt(gram_eigs(idx)).sum(-1)
            return tr_sigma + tr_c - 2.0 * f

        return w2

    # kernel_logdet
    gt = spec.effective_gamma_tilde(m, k)
    W = V @ V.T
    W = 0.5 * (W + W.T)
    eye = np.eye(k)
    if m <= 2048:
        # precompute the m x m matrix of <w_i, w_j>; batches become gathers
        P = W @ W
        P = 0.5 * (P + P.T)

        def kl(idx: np.ndarray) -> np.ndarray:
            idx = np.asarray(idx)
            M = eye + gt * P[idx[:, :, None], idx[:, None, :]]
            return 2.0 * np.log(
                np.diagonal(np.linalg.cholesky(M), axis1=-2, axis2=-1)
            ).sum(-1)

        return kl

    def kl_large(idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx)
        B = W[idx]
        M = eye + gt * (B @ B.swapaxes(-1, -2))
        return 2.0 * np.log(
            np.diagonal(np.linalg.cholesky(M), axis1=-2, axis2=-1)
        ).sum(-1)

    return kl_large
