import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cxgboost.evalkit import (
    FarReport,
    MetricsTable,
    abs_error_ate,
    chi2_sf,
    far_test,
    finner_adjust,
    finner_posthoc,
    format_far_table,
    norm_sf,
    pehe,
    performance_profile,
    profiles_to_long_csv,
    rank_standard_error,
)


def _table(values, models=None):
    values = np.asarray(values, dtype=float)
    n, k = values.shape
    return MetricsTable([f"d{i}" for i in range(n)], models or [f"m{j}" for j in range(k)], values)


# metrics

def test_metric_examples():
    mu0, mu1 = np.zeros(2), np.ones(2)
    assert abs_error_ate(mu0, mu1, np.zeros(2), np.array([0.5, 1.5])) == 0.0
    assert abs_error_ate(mu0, mu1, np.zeros(2), np.zeros(2)) == 1.0
    assert pehe(mu0, mu1, np.zeros(2), np.array([0.5, 1.5])) == 0.25
    assert pehe(mu0, mu1, mu0, mu1) == 0.0
    assert pehe(mu0, mu1, mu0, mu1 + 0.5) == 0.25


def test_metric_errors():
    with pytest.raises(ValueError):
        pehe(np.zeros(2), np.zeros(2), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        abs_error_ate([], [], [], [])


# tables

def test_table_csv_roundtrip(tmp_path, rng):
    t = _table(rng.random((4, 3)), ["a", "b", "c"])
    t.write_csv(tmp_path / "m.csv")
    back = MetricsTable.read_csv(tmp_path / "m.csv")
    assert back.model_ids == t.model_ids and back.dataset_ids == t.dataset_ids
    np.testing.assert_array_equal(back.values, t.values)
    assert (tmp_path / "m.csv").read_text().startswith("dataset_id,a,b,c\n")


def test_table_rejects_negative():
    with pytest.raises(ValueError):
        _table([[1.0, -1.0]])


# profiles

def test_profile_two_by_two():
    curves = performance_profile(_table([[1, 2], [2, 1]]))
    for c in curves:
        assert c.at(0.0) == 0.5
        assert c.at(np.log10(2)) == 1.0


def test_profile_dominant_and_ties():
    curves = performance_profile(_table([[1, 2], [1, 3], [0.5, 4]]))
    assert np.all(curves[0].rho == 1.0)
    assert all(np.all(c.rho == 1.0) for c in performance_profile(_table(np.ones((3, 3)))))


def test_profile_properties(rng):
    curves = performance_profile(_table(rng.random((20, 4))))
    for c in curves:
        assert np.all(np.diff(c.rho) >= 0) and c.rho[-1] == 1.0
    assert profiles_to_long_csv(curves).startswith("model,tau,rho\n")


def test_profile_zero_values_floor():
    curves = performance_profile(_table([[0.0, 1e-3], [0.0, 0.0]]))
    assert curves[0].at(0.0) == 1.0
    assert np.isfinite(curves[1].tau).all()


# special functions against arbitrary-precision oracles

@pytest.mark.parametrize("x,k", [(0.0, 1), (3.841459, 1), (5.99, 2), (12.0, 4), (40.0, 3), (0.3, 7)])
def test_chi2_sf_against_mpmath(x, k):
    want = float(mpmath.gammainc(k / 2, x / 2, mpmath.inf, regularized=True))
    assert chi2_sf(x, k) == pytest.approx(want, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("z", [-3.0, 0.0, 0.5, 1.96, 6.0])
def test_norm_sf_against_mpmath(z):
    want = float(mpmath.erfc(z / mpmath.sqrt(2)) / 2)
    assert norm_sf(z) == pytest.approx(want, rel=1e-12)


def test_chi2_critical_value():
    assert abs(chi2_sf(3.841459, 1) - 0.05) < 1e-6


# FAR and Finner

def test_far_full_tie():
    rep = finner_posthoc(far_test(_table(np.ones((6, 3)))))
    assert rep.statistic == 0.0 and rep.p_value == 1.0
    assert not any(c.reject for c in rep.comparisons)


def test_far_invariant_to_row_shift(rng):
    v = rng.random((8, 4))
    a = far_test(_table(v))
    b = far_test(_table(v + rng.random((8, 1)) * 10))
    assert a.statistic == pytest.approx(b.statistic, rel=1e-12)


def test_far_two_models_direction(rng):
    v = rng.random((12, 2))
    v[:, 1] += 0.3
    rep = far_test(_table(v))
    assert rep.average_ranks[0] < rep.average_ranks[1]


def test_finner_example():
    np.testing.assert_allclose(finner_adjust([0.04, 0.01, 0.2]), [0.059396, 0.029701, 0.2], atol=1e-6)
    assert finner_adjust([0.0, 0.5])[0] == 0.0
    np.testing.assert_array_equal(finner_adjust([1.0, 1.0, 1.0]), 1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10))
def test_finner_monotone_and_dominating(p):
    p = np.asarray(p)
    adj = finner_adjust(p)
    order = np.argsort(p, kind="stable")
    assert np.all(np.diff(adj[order]) >= 0)
    assert np.all(adj >= p - 1e-15) and np.all(adj <= 1.0)


# Average aligned ranks (printed to two decimals) and Finner-adjusted p-values
# from reference 5-model comparisons; the tolerance absorbs the rank rounding.
REFERENCE = [
    (15, [24.26, 26.86, 39.13, 47.93, 51.80], [0.743890, 0.081474, 0.005873, 0.002161]),
    (15, [23.06, 23.13, 41.53, 49.46, 52.80], [0.993316, 0.026997, 0.001817, 0.000747]),
    (100, [86.41, 125.85, 303.41, 350.82, 386.02], [0.053579, 0.0, 0.0, 0.0]),
    (100, [139.96, 187.66, 219.24, 255.28, 450.37], [0.019582, 0.000139, 0.0, 0.0]),
]


@pytest.mark.parametrize("n,ranks,expected", REFERENCE)
def test_posthoc_reproduces_reference_adjusted_values(n, ranks, expected):
    rep = FarReport(tuple("abcde"), n, tuple(r * n for r in ranks), tuple(ranks), 0.0, 4, 1.0)
    got = {c.model: c.p_adjusted for c in finner_posthoc(rep).comparisons}
    np.testing.assert_allclose([got[m] for m in "bcde"], expected, atol=5e-4)
    assert rank_standard_error(15, 5) == pytest.approx(np.sqrt(5 * 76 / 6))


def test_posthoc_control_and_table_layout():
    v = np.array([[0.1, 0.5, 0.9], [0.2, 0.4, 0.8], [0.1, 0.6, 0.7], [0.3, 0.5, 0.9]])
    rep = finner_posthoc(far_test(_table(v, ["best", "mid", "worst"])))
    assert rep.control == "best"
    assert [c.model for c in rep.comparisons] == ["worst", "mid"]
    text = format_far_table(rep)
    assert text.splitlines()[2].split()[-1] == "-"
    with pytest.raises(ValueError):
        finner_posthoc(far_test(_table(v)), alpha=0.0)


def test_rank_standard_error_matches_permutation_spread():
    # Under within-row permutation the spread of a difference of two average
    # aligned ranks agrees with the analytic SE up to the sqrt(k/(k-1))
    # finite-population factor; dividing the variance by n is far too small.
    rng = np.random.default_rng(21)
    n, k, draws = 30, 4, 20000
    from cxgboost.evalkit import aligned_ranks

    r = aligned_ranks(rng.random((n, k)))
    perm = rng.permuted(np.broadcast_to(r, (draws, n, k)), axis=2)
    avg = perm.mean(axis=1)
    sd = np.std(avg[:, 0] - avg[:, 1])
    se = rank_standard_error(n, k)
    assert sd == pytest.approx(se * np.sqrt(k / (k - 1)), rel=0.05)
    assert sd > 3 * np.sqrt(k * (n * k + 1) / (6 * n))
