"""Convex baselines: l1,1 lasso and l2,1 joint feature learning.

The lasso baseline is exactly the stage-1 problem of the multistage drivers
and shares their solver path.  The l2,1 model

    min_W  sum_i ||X_i w_i - y_i||^2 / (m n_i) + lam * sum_j ||w^j||_2

is solved by accelerated proximal gradient: fixed step 1/L with L estimated
by power iteration, backtracking halving on a majorization violation, and a
monotone safeguard that restarts the momentum whenever a candidate would
increase the objective.  The proximal map of the row-wise l2 norm is row
shrinkage w^j <- max(0, 1 - s*lam/||w^j||_2) * w^j, so converged rows are
either exactly zero or fully dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TaskDataset, quadratic_loss
from .multistage import MultistageConfig, run_msmtfl
from .wlasso import SolverOptions


def solve_lasso_l11(
    data: TaskDataset, lam: float, options: SolverOptions = SolverOptions()
) -> np.ndarray:
    """Minimizer of the quadratic loss plus lam * ||W||_{1,1}."""
    config = MultistageConfig(lam=lam, stages=1, theta=np.inf, solver=options)
    return run_msmtfl(data, config)[0].solution


@dataclass(frozen=True)
class L21Options:
    lam: float
    max_iterations: int = 5000
    tolerance: float = 1e-9  # relative objective change between accepted iterates

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class L21Report:
    weights: np.ndarray
    iterations: int
    converged: bool
    objective_history: np.ndarray  # accepted-iterate objective values


def l21_penalty(w: np.ndarray) -> float:
    return float(np.sum(np.sqrt(np.sum(w * w, axis=1))))


def _grad(data: TaskDataset, w: np.ndarray) -> np.ndarray:
    g = np.empty_like(w)
    for i, t in enumerate(data.tasks):
        g[:, i] = (2.0 / (data.m * t.n)) * (t.x.T @ (t.x @ w[:, i] - t.y))
    return g


def _row_shrink(w: np.ndarray, amount: float) -> np.ndarray:
    norms = np.sqrt(np.sum(w * w, axis=1))
    scale = np.zeros_like(norms)
    nz = norms > amount
    scale[nz] = 1.0 - amount / norms[nz]
    return w * scale[:, None]


def _lipschitz(data: TaskDataset, iters: int = 100) -> float:
    """2 * max_i sigma_max(X_i)^2 / (m n_i) via power iteration on X'X."""
    best = 0.0
    for t in data.tasks:
        v = np.full(data.d, 1.0 / np.sqrt(data.d))
        s = 0.0
        for _ in range(iters):
            u = t.x.T @ (t.x @ v)
            s = float(np.linalg.norm(u))
            if s == 0.0:
                break
            v = u / s
        best = max(best, 2.0 * s / (data.m * t.n))
    return best


def solve_l21(data: TaskDataset, options: L21Options) -> L21Report:
    """Accelerated proximal gradient for the l2,1-regularized model."""
    lam = options.lam
    lip = _lipschitz(data)
    step = 1.0 / lip if lip > 0 else 1.0

    x = np.zeros((data.d, data.m))
    fx = quadratic_loss(data, x) + lam * l21_penalty(x)
    y = x
    y_is_x = True
    t_mom = 1.0
    history = [fx]
    converged = False
    iterations = 0
    for k in range(options.max_iterations):
        iterations = k + 1
        gy = _grad(data, y)
        ly = quadratic_loss(data, y)
        s = step
        while True:
            z = _row_shrink(y - s * gy, s * lam)
            dz = z - y
            lz = quadratic_loss(data, z)
            bound = ly + float(np.sum(dz * gy)) + float(np.sum(dz * dz)) / (2.0 * s)
            if lz <= bound + 1e-12 * max(1.0, abs(bound)) or s < 1e-20:
                break
            s *= 0.5
        fz = lz + lam * l21_penalty(z)
        if fz <= fx:
            x_old, f_old = x, fx
            x, fx = z, fz
            t_new = (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom)) / 2.0
            coef = (t_mom - 1.0) / t_new
            y = x + coef * (x - x_old)
            y_is_x = coef == 0.0
            t_mom = t_new
            history.append(fx)
            if f_old - fx <= options.tolerance * max(1.0, abs(f_old)):
                converged = True
                break
        elif y_is_x:
            # a plain proximal step from x cannot improve: numerically optimal
            history.append(fx)
            converged = True
            break
        else:
            # momentum overshot; restart from the best iterate
            y = x
            y_is_x = True
            t_mom = 1.0
            history.append(fx)
    return L21Report(x, iterations, converged, np.array(history))
