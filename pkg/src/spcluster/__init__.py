"""Solution path clustering with an adaptive minimax concave penalty."""

from .core import (ClusterState, DataError, DataMatrix, DegenerateDataError,
                   ScaleThreshold, max_pairwise_distance, merge_threshold,
                   nn_quantile, objective, pairwise_distance)
from .evaluation import (ContingencyTable, LabeledPartition, adjusted_rand_index, ari, ari_c,
                         ari_n, label_noise, s_n)
from .optimizer import MMReport, center_update, mm_iteration, run_mm
from .penalty import PenaltyParams, max_penalty, rho, rho_prime, weight
from .scheduler import (PathConfig, Solution, SolutionPath, bvr,
                        decrease_delta, init_params, lambda_grid, run_path)
from .selection import SelectionResult, log_likelihood, select
from .simgen import ScenarioSpec, generate, generate_layout, preset
from .splitting import SplitOutcome, split_step

__version__ = "0.1.0"

__all__ = [
    "ClusterState", "ContingencyTable", "DataError", "DataMatrix",
    "DegenerateDataError", "LabeledPartition", "MMReport", "PathConfig",
    "PenaltyParams", "ScaleThreshold", "ScenarioSpec", "SelectionResult",
    "Solution", "SolutionPath", "SplitOutcome", "adjusted_rand_index", "ari", "ari_c", "ari_n",
    "bvr", "center_update", "decrease_delta", "generate", "generate_layout", "init_params",
    "label_noise", "lambda_grid", "log_likelihood", "max_pairwise_distance",
    "max_penalty", "merge_threshold", "mm_iteration", "nn_quantile",
    "objective", "pairwise_distance", "preset", "rho", "rho_prime", "run_mm",
    "run_path", "s_n", "select", "split_step", "weight",
]
