"""Weighted-l1 least squares: the inner solver of every multistage iteration.

Minimizes, per task i,

    (1/(m*n_i)) * ||X_i w_i - y_i||^2 + sum_j lam_j * |w_ji|

by cyclic coordinate descent with closed-form soft-threshold updates.  The
loss scaling folds into an effective penalty: with c = m*n_i the task problem
is the standard lasso (1/2)||X w - y||^2 + sum_j (lam_j*c/2) |w_j|, so the
coordinate update is w_j = soft(x_j'(y - X w_{-j}), lam_j*c/2) / ||x_j||^2.

Convergence is certified by the KKT residual of the original scaling: with
g = (2/c) X'(Xw - y), a solution must satisfy |g_j| <= lam_j where w_j = 0
and g_j = -sign(w_j) * lam_j otherwise.  Coordinates are visited in fixed
ascending order and task solves are independent, so results are reproducible
bit-for-bit; the convergence check runs before the first sweep, which makes a
warm start that already satisfies the KKT conditions a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import TaskDataset, check_weights


def soft_threshold(a: float, b: float) -> float:
    """sign(a) * max(|a| - b, 0), the proximal map of b*|.|."""
    if b < 0:
        raise ValueError(f"shrinkage amount must be nonnegative, got {b}")
    if a > b:
        return a - b
    if a < -b:
        return a + b
    return 0.0


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8
    max_sweeps: int = 10_000
    warm_start: np.ndarray | None = None
    track_objective: bool = False

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass(frozen=True)
class SolverReport:
    solution: np.ndarray
    sweeps_used: np.ndarray
    kkt_residual: np.ndarray
    converged: np.ndarray
    # per-task objective value after each sweep (index 0 = warm start), only
    # populated when options.track_objective is set
    objective_history: list[np.ndarray] = field(default_factory=list)


@njit(cache=True)
def _cd_task(G, b, yty, lam, lam_eff, gscale, invc, w, tol, max_sweeps, track, hist):
    """Cyclic CD on one task given its Gram matrix G = X'X and b = X'y.

    Maintains q = G w incrementally.  Returns (sweeps, kkt_residual,
    converged, n_hist); the KKT check runs before each sweep so an
    already-optimal warm start exits with zero sweeps and w untouched.
    """
    d = G.shape[0]
    q = G @ w
    n_hist = 0
    if track:
        obj = invc * (w @ q - 2.0 * (b @ w) + yty)
        for j in range(d):
            obj += lam[j] * abs(w[j])
        hist[n_hist] = obj
        n_hist += 1
    for sweep in range(max_sweeps + 1):
        res = 0.0
        for j in range(d):
            gj = gscale * (q[j] - b[j])
            if w[j] == 0.0:
                v = abs(gj) - lam[j]
                if v < 0.0:
                    v = 0.0
            elif w[j] > 0.0:
                v = abs(gj + lam[j])
            else:
                v = abs(gj - lam[j])
            if v > res:
                res = v
        if res <= tol:
            return sweep, res, True, n_hist
        if sweep == max_sweeps:
            return sweep, res, False, n_hist
        for j in range(d):
            gjj = G[j, j]
            if gjj <= 0.0:
                nw = 0.0
            else:
                rho = b[j] - q[j] + gjj * w[j]
                a = abs(rho) - lam_eff[j]
                if a <= 0.0:
                    nw = 0.0
                elif rho > 0.0:
                    nw = a / gjj
                else:
                    nw = -a / gjj
            delta = nw - w[j]
            if delta != 0.0:
                for k in range(d):
                    q[k] += delta * G[k, j]
                w[j] = nw
        if track:
            obj = invc * (w @ q - 2.0 * (b @ w) + yty)
            for j in range(d):
                obj += lam[j] * abs(w[j])
            hist[n_hist] = obj
            n_hist += 1
    return max_sweeps, np.inf, False, n_hist  # unreachable


def solve_weighted_l1(
    data: TaskDataset, penalties: np.ndarray, options: SolverOptions = SolverOptions()
) -> SolverReport:
    """Solve the per-row weighted-l1 problem; decouples into m task lassos."""
    lam = np.ascontiguousarray(penalties, dtype=np.float64)
    if lam.shape != (data.d,):
        raise ValueError(f"penalty vector length {lam.shape} != ({data.d},)")
    if np.any(lam < 0):
        raise ValueError("penalties must be nonnegative")
    m, d = data.m, data.d
    if options.warm_start is not None:
        w = check_weights(data, options.warm_start).copy(order="F")
    else:
        w = np.zeros((d, m), order="F")
    sweeps = np.zeros(m, dtype=np.int64)
    kkt = np.zeros(m)
    conv = np.zeros(m, dtype=bool)
    history: list[np.ndarray] = []
    for i, task in enumerate(data.tasks):
        c = float(m * task.n)
        G = np.ascontiguousarray(task.x.T @ task.x)
        b = np.ascontiguousarray(task.x.T @ task.y)
        yty = float(task.y @ task.y)
        hist = np.empty(options.max_sweeps + 2 if options.track_objective else 1)
        wi = np.ascontiguousarray(w[:, i])
        sweeps[i], kkt[i], conv[i], n_hist = _cd_task(
            G, b, yty, lam, lam * (c / 2.0), 2.0 / c, 1.0 / c, wi,
            options.tolerance, options.max_sweeps, options.track_objective, hist,
        )
        w[:, i] = wi
        if options.track_objective:
            history.append(hist[:n_hist].copy())
    return SolverReport(np.ascontiguousarray(w), sweeps, kkt, conv, history)


def kkt_residual(data: TaskDataset, w: np.ndarray, penalties: np.ndarray) -> np.ndarray:
    """Per-task KKT violation of the weighted-l1 problem, computed from scratch."""
    w = check_weights(data, w)
    lam = np.asarray(penalties, dtype=np.float64)
    out = np.zeros(data.m)
    for i, task in enumerate(data.tasks):
        g = (2.0 / (data.m * task.n)) * (task.x.T @ (task.x @ w[:, i] - task.y))
        zero = w[:, i] == 0.0
        viol = np.where(
            zero,
            np.maximum(np.abs(g) - lam, 0.0),
            np.abs(g + np.sign(w[:, i]) * lam),
        )
        out[i] = float(np.max(viol)) if data.d else 0.0
    return out
