"""Multi-stage multi-task sparse feature learning with adaptive thresholding."""

__version__ = "0.1.0"

from .baselines import L21Options, L21Report, solve_l21, solve_lasso_l11
from .core import (
    Task,
    TaskDataset,
    capped_l1l1_objective,
    make_dataset,
    quadratic_loss,
    row_l1_norms,
)
from .datagen import SyntheticInstance, SyntheticSpec, generate
from .dataio import ResultRow, SplitSpec, load_dataset, split, write_dataset, write_results
from .metrics import amse, l21_error, nmse
from .multistage import (
    MultistageConfig,
    StageTrace,
    lambda_from_alpha,
    run_msmtfl,
    run_msmtfl_at,
)
from .threshold import JumpResult, compute_tau, first_significant_jump
from .wlasso import SolverOptions, SolverReport, soft_threshold, solve_weighted_l1

__all__ = [
    "L21Options",
    "L21Report",
    "solve_l21",
    "solve_lasso_l11",
    "Task",
    "TaskDataset",
    "capped_l1l1_objective",
    "make_dataset",
    "quadratic_loss",
    "row_l1_norms",
    "SyntheticInstance",
    "SyntheticSpec",
    "generate",
    "ResultRow",
    "SplitSpec",
    "load_dataset",
    "split",
    "write_dataset",
    "write_results",
    "amse",
    "l21_error",
    "nmse",
    "MultistageConfig",
    "StageTrace",
    "lambda_from_alpha",
    "run_msmtfl",
    "run_msmtfl_at",
    "JumpResult",
    "compute_tau",
    "first_significant_jump",
    "SolverOptions",
    "SolverReport",
    "soft_threshold",
    "solve_weighted_l1",
]
