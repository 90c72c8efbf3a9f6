"""Multistage drivers: fixed-threshold MSMTFL and adaptive MSMTFL-AT.

Both algorithms alternate a weighted-l1 solve with a per-row penalty update

    lam_j <- lam * I(||w^j||_1 < theta)

so rows whose l1 norm reaches the threshold are treated as detected support
and go unpenalized in the next stage.  MSMTFL uses one fixed theta
throughout; MSMTFL-AT re-estimates theta each stage from the current row
norms via the first-significant-jump rule.  Stage 1 of either driver is the
uniformly penalized l1,1 lasso, and each stage warm-starts from the previous
solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import TaskDataset, capped_l1l1_objective, quadratic_loss, row_l1_norms
from .threshold import NO_JUMP, compute_tau, first_significant_jump
from .wlasso import SolverOptions, SolverReport, solve_weighted_l1

#: Fixed-threshold presets as multiples of m*lam, largest first.
THETA_PRESET_MULTIPLIERS = (50.0, 10.0, 2.0, 0.4)


def lambda_from_alpha(alpha: float, d: int, m: int, n: int) -> float:
    """alpha * sqrt(ln(d*m) / n) with n the per-task sample count."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return alpha * math.sqrt(math.log(d * m) / n)


@dataclass(frozen=True)
class MultistageConfig:
    lam: float
    stages: int = 10
    theta: float | None = None  # required by run_msmtfl, ignored by run_msmtfl_at
    tau_multiplier: float = 1.0  # used by run_msmtfl_at only
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.stages < 1:
            raise ValueError("stages must be at least 1")
        if self.theta is not None and self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.tau_multiplier <= 0:
            raise ValueError("tau_multiplier must be positive")


@dataclass(frozen=True)
class StageTrace:
    stage: int
    solution: np.ndarray
    row_norms: np.ndarray
    theta: float  # +inf when adaptive detection found no jump
    tau: float | None  # None for fixed-threshold runs
    penalties: np.ndarray  # the lam^(stage) vector produced after this stage
    objective: float
    report: SolverReport


def _run(data: TaskDataset, config: MultistageConfig, adaptive: bool) -> list[StageTrace]:
    lam = config.lam
    penalties = np.full(data.d, lam)
    warm: np.ndarray | None = None
    traces: list[StageTrace] = []
    for stage in range(1, config.stages + 1):
        opts = SolverOptions(
            tolerance=config.solver.tolerance,
            max_sweeps=config.solver.max_sweeps,
            warm_start=warm,
            track_objective=config.solver.track_objective,
        )
        report = solve_weighted_l1(data, penalties, opts)
        w = report.solution
        t = row_l1_norms(w)
        if adaptive:
            # the jump cutoff scales with the per-task sample count (the
            # average across tasks when sizes differ): dividing by the total
            # makes tau so small that the scan fires inside the false-support
            # cluster and support detection degenerates
            tau = config.tau_multiplier * compute_tau(t, data.n_total / data.m)
            theta = first_significant_jump(t, tau).theta
        else:
            tau = None
            theta = config.theta if config.theta is not None else NO_JUMP
        penalties = np.where(t < theta, lam, 0.0)
        if theta > 0:
            objective = capped_l1l1_objective(data, w, lam, theta)
        else:
            # adaptive theta hit 0 (jump right after the zero block): the
            # capped penalty sum_j min(t_j, 0) vanishes
            objective = quadratic_loss(data, w)
        traces.append(StageTrace(stage, w, t, float(theta), tau, penalties, objective, report))
        warm = w
    return traces


def run_msmtfl(data: TaskDataset, config: MultistageConfig) -> list[StageTrace]:
    """Multistage run with a fixed threshold; config.theta is required."""
    if config.theta is None:
        raise ValueError("run_msmtfl needs a fixed theta")
    return _run(data, config, adaptive=False)


def run_msmtfl_at(data: TaskDataset, config: MultistageConfig) -> list[StageTrace]:
    """Multistage run re-estimating theta each stage from the row norms."""
    return _run(data, config, adaptive=True)
