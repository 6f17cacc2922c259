"""Competing selection strategies: max-min diversity, DPP greedy MAP, and
plain index rules (first/last/uniform/random).

All strategies return SelectionResult; see that type for what ``gains`` and
``objective`` mean per strategy kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .objectives import DEFAULT_GAMMA
from .selector import SelectionResult, greedy_chol, otprune_select
from .tokenio import validate_matrix

STRATEGY_KINDS = ("otprune", "divprune", "dpp", "random", "first_k", "last_k", "uniform_index")

DIVPRUNE_METRICS = ("euclidean", "cosine")

#: Ridge added to V V^T so the DPP kernel stays strictly PD for low-rank V.
DPP_RIDGE = 1e-9


@dataclass(frozen=True)
class StrategySpec:
    """A named strategy plus the params it needs (metric, seed, gamma)."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {STRATEGY_KINDS}")
        if self.kind == "divprune":
            metric = self.params.get("metric", "euclidean")
            if metric not in DIVPRUNE_METRICS:
                raise ValueError(f"unknown metric {metric!r}; expected one of {DIVPRUNE_METRICS}")

    def label(self) -> str:
        """Human-readable tag used in reports, e.g. 'divprune(cosine)'."""
        if self.kind == "divprune":
            return f"divprune({self.params.get('metric', 'euclidean')})"
        return self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def divprune_select(V: np.ndarray, k: int, metric: str = "euclidean") -> SelectionResult:
    """Greedy max-min diversity (farthest-point) selection.

    Starts from the max-norm row, then repeatedly adds the row farthest from
    the current set (ties -> lowest index). gains[t] is the chosen row's
    distance to the set at insertion (0 for the seed row); the objective is
    the achieved min pairwise distance, which for farthest-point greedy is
    the last insertion distance (0.0 when k = 1).
    """
    V = validate_matrix(V)
    m = V.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"subset size k={k} out of range [1, {m}]")
    if metric not in DIVPRUNE_METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {DIVPRUNE_METRICS}")

    row_sq = np.einsum("ij,ij->i", V, V)
    if metric == "cosine":
        unit = V / np.maximum(np.sqrt(row_sq), 1e-12)[:, None]

    def dist_to(j):
        if metric == "euclidean":
            return np.sqrt(np.clip(row_sq + row_sq[j] - 2.0 * (V @ V[j]), 0.0, None))
        return np.clip(1.0 - unit @ unit[j], 0.0, None)

    start = int(np.argmax(row_sq))
    selected = [start]
    gains = [0.0]
    active = np.ones(m, dtype=bool)
    active[start] = False
    nearest = dist_to(start)
    for _ in range(1, k):
        j = int(np.argmax(np.where(active, nearest, -np.inf)))
        selected.append(j)
        gains.append(float(nearest[j]))
        active[j] = False
        nearest = np.minimum(nearest, dist_to(j))
    objective = min(gains[1:]) if k > 1 else 0.0
    return SelectionResult(
        indices=selected,
        gains=np.asarray(gains),
        objective=float(objective),
        gamma_tilde=None,
        kind="divprune",
    )


def dpp_select(V: np.ndarray, k: int) -> SelectionResult:
    """Greedy MAP for a determinantal point process with kernel L = V V^T + ridge.

    Shares the incremental Cholesky recursion with the log-det selector but
    runs it on raw rows of V; the objective is logdet(L_C) = sum of gains.
    """
    V = validate_matrix(V)
    m = V.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"subset size k={k} out of range [1, {m}]")
    diag = np.einsum("ij,ij->i", V, V) + DPP_RIDGE
    selected, gains, _ = greedy_chol(diag, lambda j: V @ V[j], k)
    return SelectionResult(
        indices=selected,
        gains=gains,
        objective=float(gains.sum()),
        gamma_tilde=None,
        kind="dpp",
    )


def index_select(kind: str, m: int, k: int, seed: int | None = None) -> SelectionResult:
    """Index-rule strategies: first_k, last_k, uniform_index, random.

    uniform_index takes floor(i * m / k) for i = 0..k-1 (distinct since
    k <= m); random draws k indices without replacement from a generator
    seeded with ``seed`` (required for that kind only).
    """
    if kind not in ("first_k", "last_k", "uniform_index", "random"):
        raise ValueError(f"unknown index strategy {kind!r}")
    if not 1 <= k <= m:
        raise ValueError(f"subset size k={k} out of range [1, {m}]")
    if kind == "first_k":
        indices = list(range(k))
    elif kind == "last_k":
        indices = list(range(m - k, m))
    elif kind == "uniform_index":
        indices = [(i * m) // k for i in range(k)]
    else:
        if seed is None:
            raise ValueError("random index selection requires a seed")
        rng = np.random.default_rng(seed)
        indices = [int(i) for i in rng.choice(m, size=k, replace=False)]
    return SelectionResult(
        indices=indices,
        gains=np.zeros(k),
        objective=0.0,
        gamma_tilde=None,
        kind=kind,
    )


def run_strategy(spec: StrategySpec, V: np.ndarray, k: int) -> SelectionResult:
    """Dispatch a StrategySpec against a matrix."""
    if spec.kind == "otprune":
        return otprune_select(V, k, gamma=spec.params.get("gamma", DEFAULT_GAMMA))
    if spec.kind == "divprune":
        return divprune_select(V, k, metric=spec.params.get("metric", "euclidean"))
    if spec.kind == "dpp":
        return dpp_select(V, k)
    return index_select(spec.kind, V.shape[0], k, seed=spec.params.get("seed"))
