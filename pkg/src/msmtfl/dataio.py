"""File formats: dataset manifests, per-task CSVs, splits, and results CSVs.

Dataset layout (language-neutral, schema version 1):
  * manifest: plain ``key: value`` lines -- one ``d: <int>`` line followed by
    one ``task: <relative path>`` line per task, in task order;
  * task files: headerless CSV, one row per sample, d feature columns then
    one response column.

Results files are CSV with the fixed header
``algorithm,seed,stage,lambda,theta,tau,l21_error,nmse,amse,objective``; one
row per (algorithm, seed, stage-or-grid point), empty fields where a column
does not apply.  Floats are written with shortest round-trip decimals
(``repr``), so a re-parse recovers every value exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Task, TaskDataset

RESULTS_HEADER = (
    "algorithm,seed,stage,lambda,theta,tau,l21_error,nmse,amse,objective"
)


class DataFormatError(ValueError):
    """A dataset file failed to parse; the message names file and line."""


def _parse_manifest(path: Path) -> tuple[int, list[Path]]:
    d: int | None = None
    task_paths: list[Path] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise DataFormatError(f"{path}:{lineno}: expected 'key: value', got {raw!r}")
        key, value = key.strip(), value.strip()
        if key == "d":
            try:
                d = int(value)
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: d must be an integer, got {value!r}")
        elif key == "task":
            task_paths.append(path.parent / value)
        else:
            raise DataFormatError(f"{path}:{lineno}: unknown key {key!r}")
    if d is None:
        raise DataFormatError(f"{path}: missing 'd:' line")
    if d < 1:
        raise DataFormatError(f"{path}: d must be at least 1, got {d}")
    if not task_paths:
        raise DataFormatError(f"{path}: no 'task:' lines")
    return d, task_paths


def _load_task(path: Path, d: int) -> Task:
    if not path.exists():
        raise DataFormatError(f"{path}: task file does not exist")
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != d + 1:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {d + 1} columns, got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric cell in {row!r}")
    if not rows:
        raise DataFormatError(f"{path}: task file is empty")
    arr = np.array(rows, dtype=np.float64)
    return Task(np.ascontiguousarray(arr[:, :d]), np.ascontiguousarray(arr[:, d]))


def load_dataset(manifest_path: str | Path) -> TaskDataset:
    """Load a manifest and its task files into an in-memory dataset."""
    path = Path(manifest_path)
    if not path.exists():
        raise DataFormatError(f"{path}: manifest does not exist")
    d, task_paths = _parse_manifest(path)
    return TaskDataset([_load_task(p, d) for p in task_paths])


def write_dataset(data: TaskDataset, directory: str | Path, name: str = "dataset") -> Path:
    """Export a dataset as manifest + task CSVs; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"d: {data.d}"]
    for i, task in enumerate(data.tasks):
        fname = f"{name}_task{i}.csv"
        lines.append(f"task: {fname}")
        with open(directory / fname, "w", newline="") as fh:
            for r in range(task.n):
                cells = [repr(float(v)) for v in task.x[r]] + [repr(float(task.y[r]))]
                fh.write(",".join(cells) + "\n")
    manifest = directory / f"{name}.manifest"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


@dataclass(frozen=True)
class SplitSpec:
    train_ratio: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_ratio < 1.0:
            raise ValueError(f"train_ratio must lie in (0, 1), got {self.train_ratio}")


def split(data: TaskDataset, spec: SplitSpec) -> tuple[TaskDataset, TaskDataset]:
    """Per-task train/test partition: ceil(ratio * n_i) seeded draws go to train."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    train_tasks, test_tasks = [], []
    for i, task in enumerate(data.tasks):
        if task.n < 2:
            raise ValueError(f"task {i}: needs at least 2 samples to split")
        k = math.ceil(spec.train_ratio * task.n)
        if k >= task.n:
            raise ValueError(
                f"task {i}: train_ratio {spec.train_ratio} leaves an empty test set"
            )
        chosen = np.sort(rng.choice(task.n, size=k, replace=False))
        mask = np.zeros(task.n, dtype=bool)
        mask[chosen] = True
        train_tasks.append(Task(task.x[mask], task.y[mask]))
        test_tasks.append(Task(task.x[~mask], task.y[~mask]))
    return TaskDataset(train_tasks), TaskDataset(test_tasks)


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    seed: int
    stage: int | None = None
    lam: float | None = None
    theta: float | None = None
    tau: float | None = None
    l21_error: float | None = None
    nmse: float | None = None
    amse: float | None = None
    objective: float | None = None


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def results_to_csv(rows: list[ResultRow]) -> str:
    out = [RESULTS_HEADER]
    for r in rows:
        out.append(
            ",".join(
                _cell(v)
                for v in (
                    r.algorithm, r.seed, r.stage, r.lam, r.theta, r.tau,
                    r.l21_error, r.nmse, r.amse, r.objective,
                )
            )
        )
    return "\n".join(out) + "\n"


def write_results(rows: list[ResultRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(results_to_csv(rows))
    return path


def read_results(path: str | Path) -> list[ResultRow]:
    """Parse a results CSV back into rows (used for round-trip checks)."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0] != RESULTS_HEADER:
        raise DataFormatError(f"{path}:1: unexpected results header")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 10:
            raise DataFormatError(f"{path}:{lineno}: expected 10 columns")
        def opt_float(s: str) -> float | None:
            return None if s == "" else float(s)
        rows.append(
            ResultRow(
                algorithm=cells[0],
                seed=int(cells[1]),
                stage=None if cells[2] == "" else int(cells[2]),
                lam=opt_float(cells[3]),
                theta=opt_float(cells[4]),
                tau=opt_float(cells[5]),
                l21_error=opt_float(cells[6]),
                nmse=opt_float(cells[7]),
                amse=opt_float(cells[8]),
                objective=opt_float(cells[9]),
            )
        )
    return rows
