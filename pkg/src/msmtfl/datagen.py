"""Seeded synthetic multi-task regression instances with planted row sparsity.

Each task's design matrix has i.i.d. standard normal entries; the true weight
matrix has entries uniform on [-10, 10], after which a fixed fraction of its
rows is zeroed and then a fixed fraction of the entries in the surviving rows
is zeroed (both floor counts, positions drawn without replacement).
Responses are y_i = X_i w_i + noise with Gaussian noise of the requested
standard deviation.

Randomness comes from numpy's PCG64 generator seeded with the spec's seed.
The draw order is fixed and documented so instances are reproducible: task
designs in task order, then the weight entries (row-major), then the zeroed
row subset, then the zeroed entry subset within surviving rows (row-major
entry indexing), then per-task noise in task order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Task, TaskDataset


@dataclass(frozen=True)
class SyntheticSpec:
    m: int
    n: int
    d: int
    sigma: float
    row_zero_fraction: float = 0.9
    entry_zero_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.d < 1:
            raise ValueError("m, n, d must all be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        for name in ("row_zero_fraction", "entry_zero_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")


@dataclass(frozen=True)
class SyntheticInstance:
    data: TaskDataset
    true_weights: np.ndarray
    noise: list[np.ndarray]


def generate(spec: SyntheticSpec) -> SyntheticInstance:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    designs = [rng.standard_normal((spec.n, spec.d)) for _ in range(spec.m)]
    w = rng.uniform(-10.0, 10.0, size=(spec.d, spec.m))

    n_zero_rows = int(spec.row_zero_fraction * spec.d)
    zero_rows = rng.choice(spec.d, size=n_zero_rows, replace=False)
    w[zero_rows, :] = 0.0

    survivors = np.setdiff1d(np.arange(spec.d), zero_rows)
    n_entries = survivors.size * spec.m
    n_zero_entries = int(spec.entry_zero_fraction * n_entries)
    flat = rng.choice(n_entries, size=n_zero_entries, replace=False)
    w[survivors[flat // spec.m], flat % spec.m] = 0.0

    noise = [rng.normal(0.0, spec.sigma, size=spec.n) for _ in range(spec.m)]
    tasks = [
        Task(designs[i], designs[i] @ w[:, i] + noise[i]) for i in range(spec.m)
    ]
    return SyntheticInstance(TaskDataset(tasks), w, noise)
