import math
from pathlib import Path

import numpy as np
import pytest

from msmtfl.dataio import (
    DataFormatError,
    RESULTS_HEADER,
    ResultRow,
    SplitSpec,
    load_dataset,
    read_results,
    results_to_csv,
    split,
    write_dataset,
    write_results,
)
from msmtfl.core import make_dataset
from msmtfl.datagen import SyntheticSpec, generate

TOY = Path(__file__).parent / "data" / "toy" / "toy.manifest"


def test_toy_manifest_loads_exact_values():
    data = load_dataset(TOY)
    assert data.m == 2 and data.d == 3
    assert data.n_per_task == [6, 6]
    np.testing.assert_array_equal(data.tasks[0].x[0], [1.0, 0.0, 2.0])
    np.testing.assert_array_equal(data.tasks[0].y, [5.0, -1.5, 6.0, 1.0, 4.25, 2.0])
    np.testing.assert_array_equal(data.tasks[1].x[4], [3.0, -1.0, 1.0])


def test_export_reload_round_trip_is_bit_identical(tmp_path):
    inst = generate(SyntheticSpec(m=3, n=5, d=7, sigma=0.3, seed=21))
    manifest = write_dataset(inst.data, tmp_path, name="roundtrip")
    reloaded = load_dataset(manifest)
    for a, b in zip(inst.data.tasks, reloaded.tasks):
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.y, b.y)


def test_manifest_validation_errors(tmp_path):
    p = tmp_path / "bad.manifest"
    p.write_text("task: t.csv\n")
    with pytest.raises(DataFormatError, match="missing 'd:'"):
        load_dataset(p)
    p.write_text("d: 3\n")
    with pytest.raises(DataFormatError, match="no 'task:'"):
        load_dataset(p)
    p.write_text("d: x\ntask: t.csv\n")
    with pytest.raises(DataFormatError, match="integer"):
        load_dataset(p)
    p.write_text("d: 3\nfrobnicate: 1\n")
    with pytest.raises(DataFormatError, match="unknown key"):
        load_dataset(p)
    p.write_text("d: 3\ntask: missing.csv\n")
    with pytest.raises(DataFormatError, match="does not exist"):
        load_dataset(p)
    with pytest.raises(DataFormatError):
        load_dataset(tmp_path / "nope.manifest")


def test_task_file_errors_name_file_and_line(tmp_path):
    manifest = tmp_path / "m.manifest"
    manifest.write_text("d: 2\ntask: t.csv\n")
    task = tmp_path / "t.csv"
    task.write_text("1.0,2.0,3.0\n4.0,5.0\n")
    with pytest.raises(DataFormatError, match=r"t\.csv:2"):
        load_dataset(manifest)
    task.write_text("1.0,2.0,3.0\n1.0,zebra,3.0\n")
    with pytest.raises(DataFormatError, match=r"t\.csv:2.*non-numeric"):
        load_dataset(manifest)
    # declared d larger than the file's column count fails on line 1
    manifest.write_text("d: 3\ntask: t.csv\n")
    task.write_text("1.0,2.0,3.0\n")
    with pytest.raises(DataFormatError, match=r"t\.csv:1"):
        load_dataset(manifest)


def test_split_counts_and_partition():
    rng = np.random.default_rng(0)
    data = make_dataset(
        [(rng.standard_normal((4, 2)), rng.standard_normal(4)) for _ in range(3)]
    )
    train, test = split(data, SplitSpec(train_ratio=0.5, seed=1))
    assert train.n_per_task == [2, 2, 2]
    assert test.n_per_task == [2, 2, 2]
    for orig, tr, te in zip(data.tasks, train.tasks, test.tasks):
        merged = np.vstack([tr.x, te.x])
        assert sorted(map(tuple, merged)) == sorted(map(tuple, orig.x))


def test_split_deterministic_and_seed_sensitive():
    rng = np.random.default_rng(1)
    data = make_dataset([(rng.standard_normal((20, 3)), rng.standard_normal(20))])
    a1, _ = split(data, SplitSpec(train_ratio=0.3, seed=5))
    a2, _ = split(data, SplitSpec(train_ratio=0.3, seed=5))
    b1, _ = split(data, SplitSpec(train_ratio=0.3, seed=6))
    assert np.array_equal(a1.tasks[0].x, a2.tasks[0].x)
    assert not np.array_equal(a1.tasks[0].x, b1.tasks[0].x)


def test_split_ceiling_count_matches_protocol():
    rng = np.random.default_rng(2)
    data = make_dataset([(rng.standard_normal((1560, 2)), rng.standard_normal(1560))])
    train, test = split(data, SplitSpec(train_ratio=0.15, seed=0))
    assert train.n_per_task == [234]
    assert test.n_per_task == [1560 - 234]


def test_split_validation():
    rng = np.random.default_rng(3)
    data = make_dataset([(rng.standard_normal((1, 2)), rng.standard_normal(1))])
    with pytest.raises(ValueError):
        split(data, SplitSpec(train_ratio=0.5, seed=0))
    data = make_dataset([(rng.standard_normal((4, 2)), rng.standard_normal(4))])
    with pytest.raises(ValueError):
        split(data, SplitSpec(train_ratio=0.9, seed=0))  # ceil(3.6)=4 empties test
    with pytest.raises(ValueError):
        SplitSpec(train_ratio=1.0, seed=0)


def test_results_header_and_counts(tmp_path):
    rows = [ResultRow(algorithm="lasso", seed=0, stage=1, lam=0.5, l21_error=1.25)]
    path = write_results(rows, tmp_path / "r.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == RESULTS_HEADER
    assert len(lines) == 2
    assert lines[1] == "lasso,0,1,0.5,,,1.25,,,"


def test_results_round_trip_exact(tmp_path):
    rows = [
        ResultRow("msmtfl_at", seed=3, stage=7, lam=0.1234567890123456789,
                  theta=math.inf, tau=1e-17, l21_error=2.0 / 3.0,
                  objective=1.0000000000000002),
        ResultRow("l21", seed=1, nmse=0.1, amse=0.2),
    ]
    path = write_results(rows, tmp_path / "rt.csv")
    back = read_results(path)
    assert back == rows  # dataclass equality; floats must round-trip exactly


def test_results_csv_text_deterministic():
    rows = [ResultRow("a", 0, stage=1, lam=0.25)]
    assert results_to_csv(rows) == results_to_csv(rows)


def test_read_results_rejects_malformed(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("wrong,header\n")
    with pytest.raises(DataFormatError):
        read_results(p)
    p.write_text(RESULTS_HEADER + "\nonly,three,cells\n")
    with pytest.raises(DataFormatError):
        read_results(p)
