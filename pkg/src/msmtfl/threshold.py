"""Adaptive threshold estimation from a vector of row norms.

The detector sorts the row-norm sequence ascending and scans for the first
adjacent gap strictly larger than tau; the threshold is the sorted value just
below that gap.  Small false-support norms cluster while true-support norms
spread out, so the first significant jump tends to separate the two.  tau
itself is set to the largest row norm divided by the total sample count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Returned as ``theta`` when no gap exceeds tau: every row stays penalized.
NO_JUMP = np.inf


@dataclass(frozen=True)
class JumpResult:
    theta: float
    jump_index: int | None  # 1-based position j in the sorted sequence
    found: bool


def compute_tau(t: np.ndarray, n: float) -> float:
    """max_j t[j] / n for sample count n (need not be integral)."""
    if n < 1:
        raise ValueError(f"sample count must be at least 1, got {n}")
    t = np.asarray(t, dtype=np.float64)
    if t.size == 0:
        return 0.0
    return float(np.max(t)) / n


def first_significant_jump(t: np.ndarray, tau: float) -> JumpResult:
    """Locate the first adjacent gap > tau in the ascending-sorted sequence.

    Returns theta equal to the sorted value at the jump position (never an
    interpolated value).  With fewer than two entries, or when no gap exceeds
    tau, returns found=False and theta=+inf so that a subsequent indicator
    test ``t < theta`` penalizes every row.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 1:
        raise ValueError("row-norm vector must be 1-d")
    if t.size < 2:
        return JumpResult(NO_JUMP, None, False)
    s = np.sort(t, kind="stable")
    gaps = s[1:] - s[:-1]
    hits = np.nonzero(gaps > tau)[0]
    if hits.size == 0:
        return JumpResult(NO_JUMP, None, False)
    j = int(hits[0])
    return JumpResult(float(s[j]), j + 1, True)
