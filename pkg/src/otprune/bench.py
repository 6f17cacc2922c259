"""Experiment harness: synthetic datasets, strategy comparisons through the
oracle, gamma sweeps, and rank-correlation diagnostics.

Reports are deterministic given their config except for wall-time fields;
``strip_wall_times`` removes those so two reports can be compared byte for
byte. Trials use consecutive seeds base_seed + t so any row can be re-run
in isolation.
"""

from __future__ import annotations

import dataclasses
import io
import json
import time
from dataclasses import dataclass

import numpy as np

from .baselines import STRATEGY_KINDS, StrategySpec, run_strategy
from .objectives import DEFAULT_GAMMA, ObjectiveSpec, check_subset, subset_evaluator
from .oracle import CapExceededError, evaluate_exhaustive, evaluate_monte_carlo
from .tokenio import normalize_unit_variance, synth_gaussian, validate_matrix

ORACLE_MODES = ("exhaustive", "monte_carlo")

SUMMARY_COLUMNS = (
    "strategy",
    "mean_win_rate",
    "std_win_rate",
    "mean_opt_ratio",
    "std_opt_ratio",
    "mean_wall_ms",
)


@dataclass(frozen=True)
class OracleMode:
    mode: str
    n_samples: int | None = None

    def __post_init__(self):
        if self.mode not in ORACLE_MODES:
            raise ValueError(f"oracle mode must be one of {ORACLE_MODES}, got {self.mode!r}")
        if self.mode == "monte_carlo":
            if self.n_samples is None or self.n_samples < 1:
                raise ValueError("monte_carlo mode requires n_samples >= 1")

    def to_dict(self) -> dict:
        out = {"mode": self.mode}
        if self.n_samples is not None:
            out["n_samples"] = self.n_samples
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    d: int
    k: int
    strategies: tuple
    objective: ObjectiveSpec
    oracle_mode: OracleMode
    n_trials: int
    base_seed: int = 0
    gamma: float = DEFAULT_GAMMA
    normalize: bool = True

    def __post_init__(self):
        if self.m < 1 or self.d < 1:
            raise ValueError("m and d must be >= 1")
        if not 1 <= self.k <= self.m:
            raise ValueError(f"k must satisfy 1 <= k <= m, got k={self.k}, m={self.m}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.strategies:
            raise ValueError("at least one strategy is required")

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "d": self.d,
            "k": self.k,
            "strategies": [s.to_dict() for s in self.strategies],
            "objective": self.objective.to_dict(),
            "oracle_mode": self.oracle_mode.to_dict(),
            "n_trials": self.n_trials,
            "base_seed": self.base_seed,
            "gamma": self.gamma,
            "normalize": self.normalize,
        }


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed JSON, naming the offending field
    on any violation."""
    if not isinstance(data, dict):
        raise ValueError("config: expected a JSON object")
    known = {
        "m", "d", "k", "strategies", "objective", "oracle_mode",
        "n_trials", "base_seed", "gamma", "normalize",
    }
    for key in data:
        if key not in known:
            raise ValueError(f"config.{key}: unknown field")

    def need(key, kind):
        if key not in data:
            raise ValueError(f"config.{key}: missing")
        value = data[key]
        if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
            raise ValueError(f"config.{key}: expected an integer")
        if kind is float and not isinstance(value, (int, float)):
            raise ValueError(f"config.{key}: expected a number")
        return value

    m = need("m", int)
    d = need("d", int)
    k = need("k", int)

    strategies = []
    raw_strats = need("strategies", list)
    if not isinstance(raw_strats, list) or not raw_strats:
        raise ValueError("config.strategies: expected a non-empty list")
    for i, s in enumerate(raw_strats):
        try:
            strategies.append(StrategySpec(kind=s["kind"], params=dict(s.get("params", {}))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"config.strategies[{i}]: {exc}") from exc

    raw_obj = data.get("objective")
    if not isinstance(raw_obj, dict) or "kind" not in raw_obj:
        raise ValueError("config.objective: expected an object with a 'kind'")
    try:
        objective = ObjectiveSpec(
            kind=raw_obj["kind"],
            gamma=raw_obj.get("gamma"),
            gamma_tilde=raw_obj.get("gamma_tilde"),
        )
    except ValueError as exc:
        raise ValueError(f"config.objective: {exc}") from exc

    raw_mode = data.get("oracle_mode")
    if not isinstance(raw_mode, dict) or "mode" not in raw_mode:
        raise ValueError("config.oracle_mode: expected an object with a 'mode'")
    try:
        oracle_mode = OracleMode(mode=raw_mode["mode"], n_samples=raw_mode.get("n_samples"))
    except ValueError as exc:
        raise ValueError(f"config.oracle_mode: {exc}") from exc

    try:
        return ExperimentConfig(
            m=m,
            d=d,
            k=k,
            strategies=tuple(strategies),
            objective=objective,
            oracle_mode=oracle_mode,
            n_trials=need("n_trials", int),
            base_seed=need("base_seed", int) if "base_seed" in data else 0,
            gamma=float(need("gamma", float)) if "gamma" in data else DEFAULT_GAMMA,
            normalize=bool(data.get("normalize", True)),
        )
    except ValueError as exc:
        msg = str(exc)
        raise ValueError(msg if msg.startswith("config.") else f"config: {msg}") from exc


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config: invalid JSON ({exc})") from exc
    return config_from_dict(data)


@dataclass(frozen=True)
class BenchReport:
    config: ExperimentConfig
    summary: list
    trials: list
    total_wall_ms: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "summary": self.summary,
            "trials": self.trials,
            "total_wall_ms": self.total_wall_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in self.summary:
            buf.write(
                ",".join(
                    row["strategy"] if col == "strategy" else _fmt(row[col])
                    for col in SUMMARY_COLUMNS
                )
                + "\n"
            )
        return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def strip_wall_times(obj):
    """Deep-copy a report structure with every wall-time field removed, for
    byte-for-byte determinism comparisons."""
    if isinstance(obj, dict):
        return {
            key: strip_wall_times(value)
            for key, value in obj.items()
            if not key.endswith("wall_ms")
        }
    if isinstance(obj, list):
        return [strip_wall_times(v) for v in obj]
    return obj


def _effective_objective(config: ExperimentConfig) -> ObjectiveSpec:
    obj = config.objective
    if obj.kind in ("logdet_surrogate", "kernel_logdet") and obj.gamma is None and obj.gamma_tilde is None:
        return dataclasses.replace(obj, gamma=config.gamma)
    return obj


def _strategy_for_trial(spec: StrategySpec, config: ExperimentConfig, trial: int) -> StrategySpec:
    params = dict(spec.params)
    if spec.kind in ("otprune", "dpp") and "gamma" not in params:
        params["gamma"] = config.gamma
    if spec.kind == "random" and "seed" not in params:
        params["seed"] = config.base_seed + trial
    return StrategySpec(kind=spec.kind, params=params)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> BenchReport:
    """Run every strategy over n_trials synthetic datasets and score each
    selected subset against the oracle population (built once per trial and
    shared across strategies).

    Per-strategy wall_ms measures selection only; oracle time is excluded.
    A trial whose exhaustive enumeration exceeds the cap is recorded as
    skipped and left out of the aggregates.
    """
    t_start = time.perf_counter()
    spec = _effective_objective(config)
    labels = [s.label() for s in config.strategies]
    trials = []
    for t in range(config.n_trials):
        seed = config.base_seed + t
        V = synth_gaussian(config.m, config.d, seed)
        if config.normalize:
            V, _ = normalize_unit_variance(V)
        try:
            if config.oracle_mode.mode == "exhaustive":
                population = evaluate_exhaustive(V, config.k, spec, workers=workers)
            else:
                population = evaluate_monte_carlo(
                    V, config.k, spec, config.oracle_mode.n_samples, seed, workers=workers
                )
        except CapExceededError as exc:
            trials.append({"trial": t, "seed": seed, "skipped": True, "reason": str(exc)})
            continue

        results = []
        rows = []
        for strat in config.strategies:
            effective = _strategy_for_trial(strat, config, t)
            t0 = time.perf_counter()
            result = run_strategy(effective, V, config.k)
            wall_ms = (time.perf_counter() - t0) * 1e3
            results.append(result)
            report = population.report_for(result.indices)
            rows.append(
                {
                    "strategy": effective.label(),
                    "indices": sorted(int(i) for i in result.indices),
                    "wall_ms": wall_ms,
                    "oracle": report.to_dict(),
                }
            )
        _add_relative_metrics(V, config, results, rows)
        trials.append({"trial": t, "seed": seed, "skipped": False, "strategies": rows})

    summary = _summarize(labels, trials)
    total_ms = (time.perf_counter() - t_start) * 1e3
    return BenchReport(config=config, summary=summary, trials=trials, total_wall_ms=total_ms)


def _add_relative_metrics(V, config, results, rows):
    """Attach per-strategy surrogate and Wasserstein values normalized by the
    first otprune entry's, when one is present."""
    kinds = [r.kind for r in results]
    if "otprune" not in kinds:
        return
    ref = kinds.index("otprune")
    ld_eval = subset_evaluator(V, ObjectiveSpec("logdet_surrogate", gamma=config.gamma), config.k)
    w2_eval = subset_evaluator(V, ObjectiveSpec("wasserstein2_sq"), config.k)
    idx = np.array([sorted(r.indices) for r in results], dtype=np.intp)
    ld = ld_eval(idx)
    w2 = w2_eval(idx)
    for pos, row in enumerate(rows):
        row["rel_logdet"] = float(ld[pos] / ld[ref]) if abs(ld[ref]) > 1e-300 else None
        row["rel_w2"] = float(w2[pos] / w2[ref]) if abs(w2[ref]) > 1e-300 else None


def _summarize(labels, trials) -> list:
    live = [t for t in trials if not t["skipped"]]
    summary = []
    for pos, label in enumerate(labels):
        wins = np.array([t["strategies"][pos]["oracle"]["win_rate"] for t in live])
        opts = np.array([t["strategies"][pos]["oracle"]["optimality_ratio"] for t in live])
        walls = np.array([t["strategies"][pos]["wall_ms"] for t in live])
        rels_ld = [t["strategies"][pos].get("rel_logdet") for t in live]
        rels_w2 = [t["strategies"][pos].get("rel_w2") for t in live]
        row = {
            "strategy": label,
            "mean_win_rate": float(wins.mean()) if wins.size else None,
            "std_win_rate": float(wins.std()) if wins.size else None,
            "mean_opt_ratio": float(opts.mean()) if opts.size else None,
            "std_opt_ratio": float(opts.std()) if opts.size else None,
            "mean_wall_ms": float(walls.mean()) if walls.size else None,
        }
        if any(r is not None for r in rels_ld):
            row["mean_rel_logdet"] = float(np.mean([r for r in rels_ld if r is not None]))
        if any(r is not None for r in rels_w2):
            row["mean_rel_w2"] = float(np.mean([r for r in rels_w2 if r is not None]))
        summary.append(row)
    return summary


@dataclass(frozen=True)
class GammaSweepReport:
    gammas: tuple
    reports: list
    table: list

    def to_dict(self) -> dict:
        return {
            "gammas": list(self.gammas),
            "table": self.table,
            "reports": [r.to_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        cols = ("gamma",) + SUMMARY_COLUMNS
        lines = [",".join(cols)]
        for row in self.table:
            lines.append(
                ",".join(
                    row["strategy"] if col == "strategy"
                    else _fmt(row[col]) if col != "gamma"
                    else repr(float(row["gamma"]))
                    for col in cols
                )
            )
        return "\n".join(lines) + "\n"


def gamma_sweep(config: ExperimentConfig, gammas, workers: int = 1) -> GammaSweepReport:
    """Repeat run_experiment at each gamma; config.gamma is the swept knob
    (strategy- or objective-level gammas pinned in the config stay fixed)."""
    gammas = tuple(float(g) for g in gammas)
    if not gammas:
        raise ValueError("gamma list must be non-empty")
    for g in gammas:
        if not g > 0:
            raise ValueError(f"gamma values must be positive, got {g}")
    reports = []
    table = []
    for g in gammas:
        report = run_experiment(dataclasses.replace(config, gamma=g), workers=workers)
        reports.append(report)
        for row in report.summary:
            table.append({"gamma": g, **row})
    return GammaSweepReport(gammas=gammas, reports=reports, table=table)


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks on ties (Pearson of ranks)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("inputs must be equal-length 1-D sequences")
    if xs.size < 2:
        raise ValueError("need at least 2 points")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    return float(np.corrcoef(rx, ry)[0, 1])


def _average_ranks(a: np.ndarray) -> np.ndarray:
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.size)
    sorted_a = a[order]
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def coverage_proxy(V: np.ndarray, C) -> float:
    """Mean over all rows of the squared distance to the nearest selected row;
    lower means the subset covers the cloud better. Zero when C is everything."""
    V = validate_matrix(V)
    idx = check_subset(C, V.shape[0])
    row_sq = np.einsum("ij,ij->i", V, V)
    d2 = row_sq[:, None] + row_sq[idx][None, :] - 2.0 * (V @ V[idx].T)
    d2[np.arange(V.shape[0])[:, None] == idx[None, :]] = 0.0  # exact self-distance
    return float(np.clip(d2, 0.0, None).min(axis=1).mean())


def rank_diagnostic(
    m: int = 100,
    d: int = 20,
    k: int = 10,
    n_seeds: int = 20,
    base_seed: int = 0,
    gamma: float = DEFAULT_GAMMA,
) -> dict:
    """Correlation diagnostic: rank all strategies by mean squared Wasserstein
    distance and by mean coverage proxy, and report the Spearman correlation
    between the two orderings. Diagnostic output, not a pass/fail gate."""
    w2_by_strategy = {kind: [] for kind in STRATEGY_KINDS}
    cov_by_strategy = {kind: [] for kind in STRATEGY_KINDS}
    for s in range(n_seeds):
        V = synth_gaussian(m, d, base_seed + s)
        V, _ = normalize_unit_variance(V)
        w2_eval = subset_evaluator(V, ObjectiveSpec("wasserstein2_sq"), k)
        for kind in STRATEGY_KINDS:
            params = {"gamma": gamma} if kind in ("otprune", "dpp") else {}
            if kind == "random":
                params["seed"] = base_seed + s
            result = run_strategy(StrategySpec(kind=kind, params=params), V, k)
            idx = np.sort(np.asarray(result.indices, dtype=np.intp))
            w2_by_strategy[kind].append(float(w2_eval(idx[None, :])[0]))
            cov_by_strategy[kind].append(coverage_proxy(V, idx))
    mean_w2 = [float(np.mean(w2_by_strategy[kind])) for kind in STRATEGY_KINDS]
    mean_cov = [float(np.mean(cov_by_strategy[kind])) for kind in STRATEGY_KINDS]
    return {
        "strategies": list(STRATEGY_KINDS),
        "mean_w2": mean_w2,
        "mean_coverage": mean_cov,
        "spearman_rho": spearman(mean_w2, mean_cov),
    }
