import numpy as np

from cxgboost.gbt import build_bin_mapper


def test_exact_bins_for_few_uniques():
    m = build_bin_mapper(np.array([[3.0], [1.0], [2.0], [2.0]]))
    np.testing.assert_array_equal(m.boundaries[0], [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(m.transform(np.array([[1.0], [2.5], [3.0], [9.0]]))[0], [0, 2, 2, 2])


def test_all_missing_feature_unsplittable():
    x = np.column_stack([np.full(5, np.nan), np.arange(5.0)])
    m = build_bin_mapper(x)
    assert m.n_bins[0] == 0
    assert list(m.splittable) == [False, True]
    assert (m.transform(x)[0] == m.missing_code).all()


def test_quantile_bins_equal_mass(rng):
    x = rng.random((1000, 1))
    m = build_bin_mapper(x, max_bins=4)
    counts = np.bincount(m.transform(x)[0], minlength=4)
    np.testing.assert_array_equal(counts, [250, 250, 250, 250])


def test_missing_code_shared_and_last(rng):
    x = rng.normal(size=(30, 3))
    x[::4, 1] = np.nan
    m = build_bin_mapper(x, max_bins=8)
    codes = m.transform(x)
    assert m.missing_code == m.n_bins.max()
    assert (codes[1, ::4] == m.missing_code).all()
    assert codes[1, 1::4].max() < m.n_bins[1]
