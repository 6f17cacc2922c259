"""Representative row selection by greedy maximization of a log-determinant
surrogate of the Gaussian 2-Wasserstein distance, with exact objective
evaluators, diversity baselines, subset-space oracles, and a bench harness.
"""

from .baselines import (
    DIVPRUNE_METRICS,
    STRATEGY_KINDS,
    StrategySpec,
    divprune_select,
    dpp_select,
    index_select,
    run_strategy,
)
from .bench import (
    BenchReport,
    ExperimentConfig,
    GammaSweepReport,
    OracleMode,
    config_from_dict,
    coverage_proxy,
    gamma_sweep,
    load_config,
    rank_diagnostic,
    run_experiment,
    spearman,
    strip_wall_times,
)
from .kernel import covariance, gram, psd_eigvalsh, sqrt_psd
from .objectives import (
    DEFAULT_GAMMA,
    SUBSET_OBJECTIVE_KINDS,
    ObjectiveSpec,
    kernel_logdet,
    logdet_surrogate,
    psi,
    subset_evaluator,
    trace_objective,
    wasserstein2_gaussian,
)
from .oracle import (
    EXHAUSTIVE_CAP,
    CapExceededError,
    OracleReport,
    evaluate_exhaustive,
    evaluate_monte_carlo,
    exhaustive_eval,
    monte_carlo_eval,
    win_rate_interpretation_check,
)
from .selector import (
    GreedyState,
    SelectionResult,
    StepTrace,
    greedy_chol,
    otprune_select,
    otprune_select_gamma_tilde,
    prepare_kernel,
    select_with_trace,
)
from .tokenio import (
    DEFAULT_EPSILON,
    MatrixFormatError,
    NormalizationSpec,
    infer_format,
    load_matrix,
    normalize_unit_variance,
    save_matrix,
    synth_gaussian,
    validate_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "CapExceededError",
    "DEFAULT_EPSILON",
    "DEFAULT_GAMMA",
    "DIVPRUNE_METRICS",
    "EXHAUSTIVE_CAP",
    "ExperimentConfig",
    "GammaSweepReport",
    "GreedyState",
    "MatrixFormatError",
    "NormalizationSpec",
    "ObjectiveSpec",
    "OracleMode",
    "OracleReport",
    "STRATEGY_KINDS",
    "SUBSET_OBJECTIVE_KINDS",
    "SelectionResult",
    "StepTrace",
    "StrategySpec",
    "config_from_dict",
    "coverage_proxy",
    "covariance",
    "divprune_select",
    "dpp_select",
    "evaluate_exhaustive",
    "evaluate_monte_carlo",
    "exhaustive_eval",
    "gamma_sweep",
    "gram",
    "greedy_chol",
    "index_select",
    "infer_format",
    "kernel_logdet",
    "load_config",
    "load_matrix",
    "logdet_surrogate",
    "monte_carlo_eval",
    "normalize_unit_variance",
    "otprune_select",
    "otprune_select_gamma_tilde",
    "prepare_kernel",
    "psd_eigvalsh",
    "psi",
    "rank_diagnostic",
    "run_experiment",
    "run_strategy",
    "save_matrix",
    "select_with_trace",
    "spearman",
    "sqrt_psd",
    "strip_wall_times",
    "subset_evaluator",
    "synth_gaussian",
    "trace_objective",
    "validate_matrix",
    "wasserstein2_gaussian",
    "win_rate_interpretation_check",
]
