"""Command-line surface: select / eval / oracle / bench.

Indices are 0-based everywhere (files, flags, reports). Exit codes: 0 on
success, 2 on usage or config errors, 3 on data errors, 4 when a resource
cap is exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

from . import bench as bench_mod
from .baselines import StrategySpec, run_strategy
from .objectives import (
    DEFAULT_GAMMA,
    ObjectiveSpec,
    check_subset,
    kernel_logdet,
    logdet_surrogate,
    trace_objective,
    wasserstein2_gaussian,
)
from .kernel import covariance
from .oracle import CapExceededError, evaluate_exhaustive, evaluate_monte_carlo
from .tokenio import MatrixFormatError, load_matrix, normalize_unit_variance

#: CLI method names -> strategy kinds.
METHOD_NAMES = {
    "otprune": "otprune",
    "divprune": "divprune",
    "dpp": "dpp",
    "random": "random",
    "first-k": "first_k",
    "last-k": "last_k",
    "uniform": "uniform_index",
}

#: CLI objective names -> objective kinds.
OBJECTIVE_NAMES = {
    "w2": "wasserstein2_sq",
    "trace-f": "trace_f",
    "logdet": "logdet_surrogate",
    "kernel-logdet": "kernel_logdet",
}

GREEDY_METHODS = ("otprune", "divprune", "dpp")


def _add_matrix_args(sub):
    sub.add_argument("input", help="matrix file (CSV rows or OTP1 binary)")
    sub.add_argument("--format", choices=("csv", "otp1"), default=None,
                     help="input format; default inferred from the file suffix")
    sub.add_argument("--normalize", choices=("on", "off"), default="on",
                     help="scale each column to unit variance before anything else (default on)")


def _load(args):
    V = load_matrix(args.input, format=args.format)
    if args.normalize == "on":
        V, _ = normalize_unit_variance(V)
    return V


def _check_k(args, m: int):
    if args.k < 1 or args.k > m:
        print(f"error: --k must satisfy 1 <= k <= m ({args.k} given, m={m})", file=sys.stderr)
        raise SystemExit(2)


def _method_spec(args) -> StrategySpec:
    kind = METHOD_NAMES[args.method]
    params = {}
    if kind in ("otprune", "dpp"):
        params["gamma"] = args.gamma
    if kind == "divprune":
        params["metric"] = args.metric
    if kind == "random":
        if args.seed is None:
            print("error: --seed is required for --method random", file=sys.stderr)
            raise SystemExit(2)
        params["seed"] = args.seed
    return StrategySpec(kind=kind, params=params)


def cmd_select(args) -> int:
    V = _load(args)
    _check_k(args, V.shape[0])
    result = run_strategy(_method_spec(args), V, args.k)
    payload = {
        "input": args.input,
        "method": args.method,
        "k": args.k,
        "gamma": args.gamma,
        "normalize": args.normalize == "on",
        "result": result.to_dict(),
        "indices_sorted": sorted(int(i) for i in result.indices),
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print("indices:", " ".join(str(i) for i in payload["indices_sorted"]))
        if METHOD_NAMES[args.method] in GREEDY_METHODS:
            print("order:", " ".join(str(int(i)) for i in result.indices))
        print(f"objective: {result.objective:.12g}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_eval(args) -> int:
    V = _load(args)
    try:
        subset = check_subset(_parse_subset(args.subset), V.shape[0])
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    kind = OBJECTIVE_NAMES[args.objective]
    C = [int(i) for i in subset]
    if kind == "wasserstein2_sq":
        value = wasserstein2_gaussian(covariance(V), covariance(V[subset]))
    elif kind == "trace_f":
        value = trace_objective(V, C)
    elif kind == "logdet_surrogate":
        value = logdet_surrogate(V, C, gamma=args.gamma)
    else:
        gamma_tilde = args.gamma / (V.shape[0] * len(C))
        value = kernel_logdet(V, C, gamma_tilde)
    if args.json:
        print(json.dumps({"objective": args.objective, "value": value}))
    else:
        print(f"{value:.12g}")
    return 0


def _parse_subset(text: str):
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        print(f"error: --subset must be comma-separated integers, got {text!r}", file=sys.stderr)
        raise SystemExit(2) from None


def cmd_oracle(args) -> int:
    V = _load(args)
    _check_k(args, V.shape[0])
    m = V.shape[0]
    spec = ObjectiveSpec(OBJECTIVE_NAMES[args.objective], gamma=args.gamma)
    if args.mode == "mc":
        if args.samples is None or args.seed is None:
            print("error: --mode mc requires --samples and --seed", file=sys.stderr)
            return 2
        population = evaluate_monte_carlo(
            V, args.k, spec, args.samples, args.seed, workers=args.workers
        )
    else:
        total = math.comb(m, args.k)
        print(
            f"exhaustive enumeration: C({m},{args.k}) = {total} subset evaluations",
            file=sys.stderr,
        )
        population = evaluate_exhaustive(V, args.k, spec, workers=args.workers)
    result = run_strategy(_method_spec(args), V, args.k)
    report = population.report_for(result.indices)
    text = report.to_json()
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def cmd_bench(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"error: config: invalid JSON ({exc})", file=sys.stderr)
        return 2

    gammas = None
    if isinstance(data, dict) and isinstance(data.get("gamma"), list):
        gammas = data["gamma"]
        if not gammas:
            print("error: config.gamma: empty gamma list", file=sys.stderr)
            return 2
        data = dict(data, gamma=gammas[0])
    try:
        config = bench_mod.config_from_dict(data)
        if args.normalize is not None:
            config = dataclasses.replace(config, normalize=args.normalize == "on")
        if gammas is not None and len(gammas) > 1:
            report = bench_mod.gamma_sweep(config, gammas, workers=args.workers)
            summary_rows = report.table
            sweep = True
        else:
            report = bench_mod.run_experiment(config, workers=args.workers)
            summary_rows = report.summary
            sweep = False
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.json:
        print(report.to_json())
    else:
        _print_table(summary_rows, sweep)
    written = []
    if args.out:
        json_path = f"{args.out}.json"
        csv_path = f"{args.out}.csv"
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        written = [json_path, csv_path]
        if args.figures:
            from . import figures

            if sweep:
                written += figures.render_sweep_figures(report.to_dict(), args.out)
            else:
                written += figures.render_bench_figures(report.to_dict(), args.out)
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _print_table(rows, sweep: bool):
    if sweep:
        print(f"{'gamma':>8}  {'strategy':<22}{'win_rate':>18}{'opt_ratio':>18}")
        for row in rows:
            print(
                f"{row['gamma']:>8g}  {row['strategy']:<22}"
                f"{_pm(row['mean_win_rate'], row['std_win_rate']):>18}"
                f"{_pm(row['mean_opt_ratio'], row['std_opt_ratio']):>18}"
            )
    else:
        print(f"{'strategy':<22}{'win_rate':>18}{'opt_ratio':>18}")
        for row in rows:
            print(
                f"{row['strategy']:<22}"
                f"{_pm(row['mean_win_rate'], row['std_win_rate']):>18}"
                f"{_pm(row['mean_opt_ratio'], row['std_opt_ratio']):>18}"
            )


def _pm(mean, std) -> str:
    if mean is None:
        return "n/a"
    return f"{mean:.4f}+-{std:.4f}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otprune",
        description="Representative row selection by greedy log-det maximization, "
        "with objective evaluators, baselines, oracles, and a benchmark harness. "
        "All indices are 0-based.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="select k rows from a matrix file")
    _add_matrix_args(p_select)
    p_select.add_argument("--k", type=int, required=True, help="subset size, 1 <= k <= m")
    p_select.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p_select.add_argument("--method", choices=sorted(METHOD_NAMES), default="otprune")
    p_select.add_argument("--metric", choices=("euclidean", "cosine"), default="euclidean")
    p_select.add_argument("--seed", type=int, default=None, help="seed (required for --method random)")
    p_select.add_argument("--out", default=None, help="write a JSON report here")
    p_select.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    p_select.set_defaults(func=cmd_select)

    p_eval = sub.add_parser("eval", help="evaluate an objective on a given subset")
    _add_matrix_args(p_eval)
    p_eval.add_argument("--subset", required=True, help="comma-separated row indices, e.g. 0,3,7")
    p_eval.add_argument("--objective", choices=sorted(OBJECTIVE_NAMES), required=True)
    p_eval.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p_eval.add_argument("--json", action="store_true")
    p_eval.set_defaults(func=cmd_eval)

    p_oracle = sub.add_parser("oracle", help="score a method against the subset population")
    _add_matrix_args(p_oracle)
    p_oracle.add_argument("--k", type=int, required=True)
    p_oracle.add_argument("--objective", choices=sorted(OBJECTIVE_NAMES), default="trace-f")
    p_oracle.add_argument("--mode", choices=("exhaustive", "mc"), default="exhaustive")
    p_oracle.add_argument("--samples", type=int, default=None, help="sample count for --mode mc")
    p_oracle.add_argument("--seed", type=int, default=None,
                          help="sampling seed for --mode mc (also seeds --method random)")
    p_oracle.add_argument("--method", choices=sorted(METHOD_NAMES), default="otprune")
    p_oracle.add_argument("--metric", choices=("euclidean", "cosine"), default="euclidean")
    p_oracle.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p_oracle.add_argument("--workers", type=int, default=1)
    p_oracle.add_argument("--out", default=None, help="write the JSON report here")
    p_oracle.set_defaults(func=cmd_oracle)

    p_bench = sub.add_parser("bench", help="run a benchmark config")
    p_bench.add_argument("config", help="JSON experiment config")
    p_bench.add_argument("--normalize", choices=("on", "off"), default=None,
                         help="override the config's normalize flag")
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--out", default=None,
                         help="report path prefix; writes PREFIX.json, PREFIX.csv and figures")
    p_bench.add_argument("--no-figures", dest="figures", action="store_false",
                         help="skip PNG rendering next to the reports")
    p_bench.add_argument("--json", action="store_true", help="print the full JSON report")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CapExceededError as exc:
        print(f"error: {exc} (try --mode mc)", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
