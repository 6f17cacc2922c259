"""Greedy subset selection by incremental Cholesky on a positive definite kernel.

The selector maximizes logdet(I + gamma_tilde * W_C W_C^T) over size-k row
subsets, where W = V V^T. Writing K = I + gamma_tilde * W W^T, the chosen
subset's objective is logdet(K_C), and greedy gains come out of a Cholesky
factorization of K grown one pivot at a time:

    d_i^2 = K_ii - ||c_i||^2            (current marginal gain of row i)
    pick j = argmax d_i^2               (ties -> lowest index)
    e_i   = (K_ji - <c_j, c_i>) / d_j   (new Cholesky coordinate)
    d_i^2 <- d_i^2 - e_i^2

Each step costs O(m d + m t) with the kernel row K_j formed as
gamma_tilde * V (V^T w_j), so a full run is O(m d k + m k^2) after the
O(m^2 d) gram precompute.

K >= I keeps every d_j^2 >= 1 in exact arithmetic; float cancellation can
undershoot when k approaches m, so d_j^2 is floored at 1e-12 before the
division and the log.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .objectives import DEFAULT_GAMMA
from .tokenio import validate_matrix

#: Floor applied to d_j^2 before dividing or taking its log.
D_SQ_FLOOR = 1e-12


@dataclass
class GreedyState:
    """Mutable state of one greedy run; single-owner, not shared mid-run.

    ``coeffs`` holds the Cholesky coordinates row-per-step: column i of
    ``coeffs[:len(selected)]`` is c_i.
    """

    selected: list = field(default_factory=list)
    d_sq: np.ndarray = None
    coeffs: np.ndarray = None
    active: np.ndarray = None


@dataclass(frozen=True)
class StepTrace:
    """Snapshot taken just before a pivot is chosen."""

    step: int
    chosen: int
    d_sq: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a selection strategy.

    ``gains`` and ``objective`` are strategy-specific: for the greedy
    log-det strategies (otprune, dpp) gains are per-step log d_j^2 and
    objective is their sum; divprune reports per-step nearest distances
    and the achieved min pairwise distance; plain index strategies carry
    zero gains and objective.
    """

    indices: list
    gains: np.ndarray
    objective: float
    gamma_tilde: float | None = None
    kind: str = "otprune"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "indices": [int(i) for i in self.indices],
            "gains": [float(g) for g in self.gains],
            "objective": float(self.objective),
            "gamma_tilde": self.gamma_tilde,
        }


def greedy_chol(diag: np.ndarray, row_fn, k: int, want_trace: bool = False):
    """Run the incremental Cholesky greedy on a PD kernel given by its
    diagonal and a row oracle ``row_fn(j) -> K[j, :]``.

    Returns (selected, gains, trace). Off-diagonal kernel values are all the
    row oracle provides; the entry at the pivot itself is never read.
    """
    m = diag.shape[0]
    state = GreedyState(
        selected=[],
        d_sq=diag.astype(float).copy(),
        coeffs=np.zeros((max(k - 1, 1), m)),
        active=np.ones(m, dtype=bool),
    )
    gains = []
    trace = []
    for t in range(k):
        scores = np.where(state.active, state.d_sq, -np.inf)
        j = int(np.argmax(scores))
        dj_sq = max(float(state.d_sq[j]), D_SQ_FLOOR)
        if not np.isfinite(dj_sq):
            raise ValueError(f"non-finite selection score at step {t}")
        if want_trace:
            trace.append(StepTrace(step=t, chosen=j, d_sq=state.d_sq.copy()))
        state.selected.append(j)
        state.active[j] = False
        gains.append(np.log(dj_sq))
        if t + 1 == k:
            break
        dj = np.sqrt(dj_sq)
        row = row_fn(j)
        if t == 0:
            eis = row / dj
        else:
            cis = state.coeffs[:t]
            eis = (row - cis.T @ cis[:, j]) / dj
        state.coeffs[t] = eis
        state.d_sq -= eis * eis
    return state.selected, np.asarray(gains), trace


def prepare_kernel(V: np.ndarray, gamma_tilde: float):
    """Precompute the greedy kernel K = I + gamma_tilde * W W^T with W = V V^T.

    Returns (diag, row_fn): the kernel diagonal and an O(m d) oracle for
    off-diagonal rows, ready for greedy_chol. This is the O(m^2 d) setup
    phase; the greedy iterations themselves are O(mk^2 + mdk).
    """
    V = validate_matrix(V)
    if not gamma_tilde > 0:
        raise ValueError("gamma_tilde must be positive")
    W = V @ V.T
    # ||w_i||^2 = v_i^T (V^T V) v_i: O(m d^2) instead of an O(m^2) pass over W
    G = V.T @ V
    diag = 1.0 + gamma_tilde * np.einsum("ij,ij->i", V @ G, V)

    def row_fn(j):
        # gamma_tilde * <w_j, w_i> for all i, as V (V^T w_j): O(m d)
        return gamma_tilde * (V @ (V.T @ W[j]))

    return diag, row_fn


def _otprune_run(V: np.ndarray, k: int, gamma_tilde: float, want_trace: bool):
    V = validate_matrix(V)
    m = V.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"subset size k={k} out of range [1, {m}]")
    diag, row_fn = prepare_kernel(V, gamma_tilde)
    selected, gains, trace = greedy_chol(diag, row_fn, k, want_trace)
    result = SelectionResult(
        indices=selected,
        gains=gains,
        objective=float(gains.sum()),
        gamma_tilde=gamma_tilde,
        kind="otprune",
    )
    return result, trace


def otprune_select_gamma_tilde(V: np.ndarray, k: int, gamma_tilde: float) -> SelectionResult:
    """Greedy selection at a directly specified kernel scale gamma_tilde."""
    result, _ = _otprune_run(V, k, gamma_tilde, want_trace=False)
    return result


def otprune_select(V: np.ndarray, k: int, gamma: float = DEFAULT_GAMMA) -> SelectionResult:
    """Select k rows of V greedily; gamma is rescaled to gamma_tilde = gamma/(m k).

    The result's objective matches ``kernel_logdet(V, indices, gamma_tilde)``
    up to accumulated rounding (within 1e-6 at tested scales).
    """
    V = validate_matrix(V)
    if not 1 <= k <= V.shape[0]:
        raise ValueError(f"subset size k={k} out of range [1, {V.shape[0]}]")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return otprune_select_gamma_tilde(V, k, gamma / (V.shape[0] * k))


def select_with_trace(V: np.ndarray, k: int, gamma: float = DEFAULT_GAMMA):
    """As otprune_select, additionally returning per-step StepTrace snapshots."""
    V = validate_matrix(V)
    if not 1 <= k <= V.shape[0]:
        raise ValueError(f"subset size k={k} out of range [1, {V.shape[0]}]")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return _otprune_run(V, k, gamma / (V.shape[0] * k), want_trace=True)
