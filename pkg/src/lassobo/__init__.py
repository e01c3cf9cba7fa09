"""High-dimensional Bayesian optimization with Lasso-penalized lengthscales.

The surrogate is a GP whose inverse squared lengthscales are fitted under an
L1 penalty; coordinates whose fitted value exceeds the mean are optimized by
UCB while the rest are imputed from the incumbent or drawn at random.
"""

from .acquisition import AcqConfig, beta_t, maximize_over_space, ucb
from .benchmarks import PaddedObjective, make_benchmark, rho_alpha_correlation
from .engine import (
    DROPOUT_BO,
    LASSOBO,
    RANDOM_SEARCH,
    VANILLA_BO,
    RunAborted,
    RunConfig,
    RunResult,
    repeat_runs,
    run,
    run_baseline,
    run_lassobo,
)
from .gp import (
    MATERN52,
    SE,
    ContractError,
    Dataset,
    KernelHyperparams,
    NumericalError,
    PosteriorModel,
    fit_posterior,
    kernel_eval,
    kernel_matrix,
    sample_gp_path_1d,
)
from .likelihood import FitConfig, fit_hyperparams, neg_log_marginal_lasso
from .search_space import SearchSpaceSpec, build_search_space, mt_schedule
from .selection import ImportanceState, selection_metrics

__version__ = "0.1.0"

__all__ = [
    "AcqConfig", "beta_t", "maximize_over_space", "ucb",
    "PaddedObjective", "make_benchmark", "rho_alpha_correlation",
    "DROPOUT_BO", "LASSOBO", "RANDOM_SEARCH", "VANILLA_BO",
    "RunAborted", "RunConfig", "RunResult", "repeat_runs", "run", "run_baseline", "run_lassobo",
    "MATERN52", "SE", "ContractError", "Dataset", "KernelHyperparams", "NumericalError",
    "PosteriorModel", "fit_posterior", "kernel_eval", "kernel_matrix", "sample_gp_path_1d",
    "FitConfig", "fit_hyperparams", "neg_log_marginal_lasso",
    "SearchSpaceSpec", "build_search_space", "mt_schedule",
    "ImportanceState", "selection_metrics",
]
