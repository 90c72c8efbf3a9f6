import numpy as np
import pytest

from msmtfl.core import quadratic_loss, row_l1_norms
from msmtfl.datagen import SyntheticSpec, SyntheticInstance, generate


def test_noiseless_instance_is_consistent():
    inst = generate(SyntheticSpec(m=3, n=8, d=10, sigma=0.0, seed=42))
    assert quadratic_loss(inst.data, inst.true_weights) == 0.0
    for i, task in enumerate(inst.data.tasks):
        np.testing.assert_array_equal(task.y, task.x @ inst.true_weights[:, i])


def test_sparsity_counts_are_exact():
    spec = SyntheticSpec(m=20, n=30, d=200, sigma=0.005, seed=0)
    inst = generate(spec)
    norms = row_l1_norms(inst.true_weights)
    # exactly floor(0.9*200)=180 rows were zeroed (and for this seed no
    # surviving row lost all its entries); survivors then lost exactly
    # floor(0.8 * 20 * m) entries among their 20*m entries
    assert int(np.sum(norms == 0.0)) == 180
    surviving = inst.true_weights[norms > 0.0]
    assert surviving.shape == (20, 20)
    n_zero_entries = int(np.sum(surviving == 0.0))
    assert n_zero_entries == int(0.8 * 20 * 20) == 320


def test_generic_counts():
    spec = SyntheticSpec(m=3, n=5, d=17, sigma=0.1, row_zero_fraction=0.55,
                         entry_zero_fraction=0.25, seed=9)
    inst = generate(spec)
    norms = row_l1_norms(inst.true_weights)
    n_zero_rows = int(0.55 * 17)
    assert int(np.sum(norms == 0.0)) == n_zero_rows
    surviving = inst.true_weights[norms > 0.0]
    assert int(np.sum(surviving == 0.0)) == int(0.25 * surviving.size)


def test_same_seed_bit_identical_different_seed_differs():
    spec = SyntheticSpec(m=2, n=6, d=12, sigma=0.01, seed=7)
    a, b = generate(spec), generate(spec)
    assert np.array_equal(a.true_weights, b.true_weights)
    for ta, tb in zip(a.data.tasks, b.data.tasks):
        assert np.array_equal(ta.x, tb.x)
        assert np.array_equal(ta.y, tb.y)
    c = generate(SyntheticSpec(m=2, n=6, d=12, sigma=0.01, seed=8))
    assert not np.array_equal(a.true_weights, c.true_weights)


def test_design_moments_match_sampling_distribution():
    inst = generate(SyntheticSpec(m=2, n=400, d=250, sigma=0.0, seed=3))
    x = np.concatenate([t.x.ravel() for t in inst.data.tasks])
    se_mean = 1.0 / np.sqrt(x.size)
    assert abs(x.mean()) <= 3 * se_mean
    se_var = np.sqrt(2.0 / (x.size - 1))
    assert abs(x.var() - 1.0) <= 3 * se_var


def test_surviving_rows_give_positive_l21_mass():
    inst = generate(SyntheticSpec(m=4, n=5, d=30, sigma=0.0, seed=11))
    assert np.sum(np.sqrt((inst.true_weights**2).sum(axis=1))) > 0.0


def test_noise_realizations_recorded():
    inst = generate(SyntheticSpec(m=3, n=7, d=5, sigma=0.2, seed=5))
    assert isinstance(inst, SyntheticInstance)
    for i, task in enumerate(inst.data.tasks):
        np.testing.assert_allclose(
            task.y, task.x @ inst.true_weights[:, i] + inst.noise[i], atol=0
        )


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(m=0, n=5, d=5, sigma=0.1)
    with pytest.raises(ValueError):
        SyntheticSpec(m=1, n=5, d=5, sigma=-0.1)
    with pytest.raises(ValueError):
        SyntheticSpec(m=1, n=5, d=5, sigma=0.1, row_zero_fraction=1.0)
    with pytest.raises(ValueError):
        SyntheticSpec(m=1, n=5, d=5, sigma=0.1, entry_zero_fraction=-0.2)
