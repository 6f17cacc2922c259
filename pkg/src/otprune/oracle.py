"""Ground truth over the subset space: exhaustive and Monte Carlo evaluation
of all (or sampled) size-k subsets, yielding win rate and optimality ratio
for a method's subset.

Win semantics: strict dominance, ties count as losses. For higher-is-better
objectives a win is method_value > value(C); for the squared Wasserstein
distance (lower is better) the comparison flips. The method's own subset is
never part of the population it is scored against.

Determinism: enumeration and sampling are partitioned into fixed-size chunks
(CHUNK subsets each, independent of the worker count). Monte Carlo chunk c
draws from ``default_rng([seed, c])``; chunk results are reduced in chunk
order. Any worker count therefore reproduces the sequential result bit for
bit.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .objectives import ObjectiveSpec, check_subset, subset_evaluator
from .tokenio import validate_matrix

#: Default ceiling on exhaustive enumeration size.
EXHAUSTIVE_CAP = 100_000_000

#: Subsets per evaluation chunk; fixed so results never depend on workers.
CHUNK = 16384


class CapExceededError(RuntimeError):
    """Exhaustive enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class OracleReport:
    objective_kind: str
    mode: str
    n_evaluated: int
    best_value: float
    best_subset: tuple
    mean_value: float
    method_value: float
    win_rate: float
    optimality_ratio: float
    seed: int | None = None

    def to_dict(self) -> dict:
        out = {
            "objective_kind": self.objective_kind,
            "mode": self.mode,
            "n_evaluated": self.n_evaluated,
            "best_value": self.best_value,
            "best_subset": [int(i) for i in self.best_subset],
            "mean_value": self.mean_value,
            "method_value": self.method_value,
            "win_rate": self.win_rate,
            "optimality_ratio": self.optimality_ratio,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class Population:
    """Evaluated subset population, reusable across method subsets."""

    mode: str
    spec: ObjectiveSpec
    m: int
    k: int
    n: int
    values: np.ndarray
    best_value: float
    best_subset: tuple
    seed: int | None
    evaluator: object

    def report_for(self, method_subset) -> OracleReport:
        idx = np.sort(check_subset(method_subset, self.m))
        if idx.size != self.k:
            raise ValueError(f"method subset has size {idx.size}, expected k={self.k}")
        method_value = float(self.evaluator(idx[None, :])[0])
        if self.spec.higher_is_better:
            wins = int(np.count_nonzero(self.values < method_value))
        else:
            wins = int(np.count_nonzero(self.values > method_value))
        ratio = method_value / self.best_value if self.best_value > 0 else float("nan")
        return OracleReport(
            objective_kind=self.spec.kind,
            mode=self.mode,
            n_evaluated=self.n,
            best_value=self.best_value,
            best_subset=self.best_subset,
            mean_value=float(self.values.sum() / self.n),
            method_value=method_value,
            win_rate=wins / self.n,
            optimality_ratio=float(ratio),
            seed=self.seed,
        )


def _run_chunks(payloads, eval_chunk, workers: int):
    """Evaluate chunk payloads (an iterable) and return results in payload
    order. Submission is windowed so lazy payload generators stay lazy."""
    if workers <= 1:
        return [eval_chunk(p) for p in payloads]
    results = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        window = []
        for p in payloads:
            window.append(pool.submit(eval_chunk, p))
            if len(window) >= 4 * workers:
                results.append(window.pop(0).result())
        results.extend(f.result() for f in window)
    return results


def _reduce(chunks, higher_is_better: bool):
    """Fold ordered (values, best_value, best_subset) chunk results; strict
    comparison keeps the earliest-enumerated optimum on ties."""
    values = np.concatenate([c[0] for c in chunks])
    best_value, best_subset = chunks[0][1], chunks[0][2]
    for _, bv, bs in chunks[1:]:
        if (bv > best_value) if higher_is_better else (bv < best_value):
            best_value, best_subset = bv, bs
    return values, best_value, best_subset


def evaluate_exhaustive(
    V: np.ndarray,
    k: int,
    spec: ObjectiveSpec,
    cap: int = EXHAUSTIVE_CAP,
    workers: int = 1,
) -> Population:
    """Evaluate every k-subset in lexicographic order."""
    V = validate_matrix(V)
    m = V.shape[0]
    total = math.comb(m, k) if 0 < k <= m else 0
    if not 1 <= k <= m:
        raise ValueError(f"subset size k={k} out of range [1, {m}]")
    if total > cap:
        raise CapExceededError(
            f"C({m},{k}) = {total} exceeds the exhaustive cap {cap}; use Monte Carlo"
        )
    evaluator = subset_evaluator(V, spec, k)
    pick = np.argmax if spec.higher_is_better else np.argmin

    def eval_chunk(block: np.ndarray):
        vals = evaluator(block)
        pos = int(pick(vals))
        return vals, float(vals[pos]), tuple(int(i) for i in block[pos])

    def payloads():
        it = itertools.combinations(range(m), k)
        while True:
            block = list(itertools.islice(it, CHUNK))
            if not block:
                break
            yield np.array(block, dtype=np.intp)

    chunks = _run_chunks(payloads(), eval_chunk, workers)
    values, best_value, best_subset = _reduce(chunks, spec.higher_is_better)
    return Population(
        mode="exhaustive",
        spec=spec,
        m=m,
        k=k,
        n=total,
        values=values,
        best_value=best_value,
        best_subset=best_subset,
        seed=None,
        evaluator=evaluator,
    )


def evaluate_monte_carlo(
    V: np.ndarray,
    k: int,
    spec: ObjectiveSpec,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> Population:
    """Evaluate n_samples uniformly drawn k-subsets (duplicates permitted).

    Each draw takes the k smallest of m iid uniforms, giving a uniform
    k-subset; rows are sorted ascending before evaluation.
    """
    V = validate_matrix(V)
    m = V.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"subset size k={k} out of range [1, {m}]")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    evaluator = subset_evaluator(V, spec, k)
    pick = np.argmax if spec.higher_is_better else np.argmin

    def eval_chunk(payload):
        chunk_idx, count = payload
        rng = np.random.default_rng([seed, chunk_idx])
        u = rng.random((count, m))
        idx = np.argpartition(u, k - 1, axis=1)[:, :k]
        idx.sort(axis=1)
        vals = evaluator(idx)
        pos = int(pick(vals))
        return vals, float(vals[pos]), tuple(int(i) for i in idx[pos])

    payloads = [
        (c, min(CHUNK, n_samples - c * CHUNK))
        for c in range((n_samples + CHUNK - 1) // CHUNK)
    ]
    chunks = _run_chunks(payloads, eval_chunk, workers)
    values, best_value, best_subset = _reduce(chunks, spec.higher_is_better)
    return Population(
        mode="monte_carlo",
        spec=spec,
        m=m,
        k=k,
        n=n_samples,
        values=values,
        best_value=best_value,
        best_subset=best_subset,
        seed=seed,
        evaluator=evaluator,
    )


def exhaustive_eval(
    V: np.ndarray,
    k: int,
    spec: ObjectiveSpec,
    method_subset,
    cap: int = EXHAUSTIVE_CAP,
    workers: int = 1,
) -> OracleReport:
    """Score method_subset against every k-subset of rows of V."""
    return evaluate_exhaustive(V, k, spec, cap=cap, workers=workers).report_for(method_subset)


def monte_carlo_eval(
    V: np.ndarray,
    k: int,
    spec: ObjectiveSpec,
    method_subset,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> OracleReport:
    """Score method_subset against a seeded uniform sample of k-subsets."""
    pop = evaluate_monte_carlo(V, k, spec, n_samples, seed, workers=workers)
    return pop.report_for(method_subset)


def win_rate_interpretation_check(report: OracleReport) -> float:
    """The win rate of a Monte Carlo report IS the empirical probability that
    the method's value strictly dominates a uniformly drawn subset's value;
    returned as-is to pin that reading down where tests can assert it."""
    if report.mode != "monte_carlo":
        raise ValueError("interpretation check applies to monte_carlo reports")
    return float(report.win_rate)
