"""Multi-task data containers and the objectives everything else is built on.

A problem instance is a list of per-task regression problems (X_i, y_i) that
share a common feature space of dimension d.  The weight matrix W is d x m:
column i is the weight vector of task i, row j collects feature j's weights
across all tasks.  All numerics are float64 ndarrays; containers are immutable
after construction and all operations here are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Task:
    """One regression task: n_i x d design matrix and length-n_i response."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class TaskDataset:
    """m tasks over a shared d-dimensional feature space."""

    tasks: list[Task] = field(default_factory=list)

    def __post_init__(self):
        if not self.tasks:
            raise ValueError("dataset needs at least one task")
        d = self.tasks[0].x.shape[1] if self.tasks[0].x.ndim == 2 else -1
        for i, t in enumerate(self.tasks):
            if t.x.ndim != 2 or t.y.ndim != 1:
                raise ValueError(f"task {i}: design must be 2-d and response 1-d")
            if t.x.shape[1] != d or d < 1:
                raise ValueError(
                    f"task {i}: feature count {t.x.shape[1]} != {d} of task 0"
                )
            if t.x.shape[0] != t.y.shape[0]:
                raise ValueError(
                    f"task {i}: {t.x.shape[0]} rows vs {t.y.shape[0]} responses"
                )
            if t.x.shape[0] < 1:
                raise ValueError(f"task {i}: needs at least one sample")

    @property
    def m(self) -> int:
        return len(self.tasks)

    @property
    def d(self) -> int:
        return self.tasks[0].x.shape[1]

    @property
    def n_per_task(self) -> list[int]:
        return [t.n for t in self.tasks]

    @property
    def n_total(self) -> int:
        return sum(t.n for t in self.tasks)


def make_dataset(pairs) -> TaskDataset:
    """Build a TaskDataset from (X, y) pairs, coercing to float64 C-order."""
    tasks = [
        Task(np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(y, dtype=np.float64))
        for x, y in pairs
    ]
    return TaskDataset(tasks)


def check_weights(data: TaskDataset, w: np.ndarray) -> np.ndarray:
    """Validate a weight matrix against a dataset's d and m."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (data.d, data.m):
        raise ValueError(f"weight matrix shape {w.shape} != ({data.d}, {data.m})")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight matrix has non-finite entries")
    return w


def quadratic_loss(data: TaskDataset, w: np.ndarray) -> float:
    """sum_i ||X_i w_i - y_i||^2 / (m * n_i), the task-averaged squared loss."""
    w = check_weights(data, w)
    m = data.m
    total = 0.0
    for i, t in enumerate(data.tasks):
        r = t.x @ w[:, i] - t.y
        total += float(r @ r) / (m * t.n)
    return total


def row_l1_norms(w: np.ndarray) -> np.ndarray:
    """Per-row l1 norms of a weight matrix: t[j] = sum_i |w[j, i]|."""
    return np.sum(np.abs(np.asarray(w, dtype=np.float64)), axis=1)


def capped_l1l1_objective(
    data: TaskDataset, w: np.ndarray, lam: float, theta: float
) -> float:
    """Quadratic loss plus lam * sum_j min(||w^j||_1, theta).

    theta may be +inf, in which case the cap is inactive and the penalty is
    the plain l1,1 norm of w.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    t = row_l1_norms(check_weights(data, w))
    return quadratic_loss(data, w) + lam * float(np.sum(np.minimum(t, theta)))
