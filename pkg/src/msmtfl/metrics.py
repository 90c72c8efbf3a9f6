"""Evaluation metrics: row-wise l2,1 parameter error, nMSE and aMSE.

nMSE is implemented exactly as defined for this family of benchmarks,

    nMSE = n * ||y_hat - y_ref||^2 / (||y_hat||_1 * ||y_ref||_1),

including its unusual prediction-dependent l1 denominator, which can make it
non-monotone in prediction quality.  aMSE = ||y_hat - y_ref|| / ||y_ref|| is
the plain relative Euclidean error.  Responses are stacked across tasks in
task order before either is computed.
"""

from __future__ import annotations

import numpy as np

from .core import TaskDataset


def l21_error(estimated: np.ndarray, truth: np.ndarray) -> float:
    """Sum over rows of the Euclidean norm of the row difference."""
    a = np.asarray(estimated, dtype=np.float64)
    b = np.asarray(truth, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sum(np.sqrt(np.sum(diff * diff, axis=1))))


def nmse(predicted: np.ndarray, reference: np.ndarray, n: int) -> float:
    y_hat = np.asarray(predicted, dtype=np.float64)
    y_ref = np.asarray(reference, dtype=np.float64)
    if y_hat.shape != y_ref.shape or y_hat.ndim != 1:
        raise ValueError(f"need equal-length vectors, got {y_hat.shape} and {y_ref.shape}")
    if n < 1:
        raise ValueError("n must be positive")
    denom = float(np.sum(np.abs(y_hat))) * float(np.sum(np.abs(y_ref)))
    if denom == 0.0:
        raise ValueError(
            "nMSE denominator ||y_hat||_1 * ||y_ref||_1 is zero; "
            "predictions or references are identically zero"
        )
    diff = y_hat - y_ref
    return n * float(diff @ diff) / denom


def amse(predicted: np.ndarray, reference: np.ndarray) -> float:
    y_hat = np.asarray(predicted, dtype=np.float64)
    y_ref = np.asarray(reference, dtype=np.float64)
    if y_hat.shape != y_ref.shape or y_hat.ndim != 1:
        raise ValueError(f"need equal-length vectors, got {y_hat.shape} and {y_ref.shape}")
    ref_norm = float(np.linalg.norm(y_ref))
    if ref_norm == 0.0:
        raise ValueError("aMSE reference norm is zero")
    return float(np.linalg.norm(y_hat - y_ref)) / ref_norm


def stacked_predictions(data: TaskDataset, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(y_hat, y_ref) stacked across tasks in task order."""
    y_hat = np.concatenate([t.x @ w[:, i] for i, t in enumerate(data.tasks)])
    y_ref = np.concatenate([t.y for t in data.tasks])
    return y_hat, y_ref


def per_task_errors(data: TaskDataset, w: np.ndarray) -> list[dict[str, float]]:
    """Per-task nMSE/aMSE diagnostics."""
    out = []
    for i, t in enumerate(data.tasks):
        y_hat = t.x @ w[:, i]
        out.append({"nmse": nmse(y_hat, t.y, t.n), "amse": amse(y_hat, t.y)})
    return out
