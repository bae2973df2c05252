import warnings

import numpy as np
import pytest

from cxgboost.causal import (
    CausalObjective,
    HessianMode,
    causal_gradient,
    causal_hessian,
    causal_loss,
    estimate_ate,
    fit_cxgboost,
    fit_estimator,
    fit_slearner,
    fit_tlearner,
    load_model,
    predict_ite,
    save_model,
)
from cxgboost.dataset import Dataset
from cxgboost.gbt import TrainConfig

from conftest import make_causal


def test_loss_examples():
    assert causal_loss(123.0, 0.3, 1, 1.0) == pytest.approx(0.49)
    assert causal_loss(0.5, -7.0, 0, 1.0) == 0.25
    assert causal_loss(0.2, 9.0, 0, 0.2) == 0.0


def test_gradient_examples():
    assert causal_gradient(0.5, 3.0, 0, 1.0) == (-1.0, 0.0)
    g0, g1 = causal_gradient(0.0, 0.3, 1, 1.0)
    assert g0 == 0.0 and g1 == pytest.approx(-1.4)
    assert causal_gradient(0.0, 1.0, 1, 1.0) == (0.0, 0.0)


def test_hessian_modes():
    assert tuple(map(float, causal_hessian(np.array(0), "paper-literal"))) == (2.0, 2.0)
    assert tuple(map(float, causal_hessian(np.array(0), "exact"))) == (2.0, 0.0)
    assert tuple(map(float, causal_hessian(np.array(1), HessianMode.EXACT))) == (0.0, 2.0)


def test_gradient_matches_finite_differences(rng):
    n = 500
    q0, q1, y = rng.normal(size=(3, n))
    t = rng.integers(0, 2, n)
    g0, g1 = causal_gradient(q0, q1, t, y)
    eps = 1e-6
    fd0 = (causal_loss(q0 + eps, q1, t, y) - causal_loss(q0 - eps, q1, t, y)) / (2 * eps)
    fd1 = (causal_loss(q0, q1 + eps, t, y) - causal_loss(q0, q1 - eps, t, y)) / (2 * eps)
    np.testing.assert_allclose(g0, fd0, atol=1e-7)
    np.testing.assert_allclose(g1, fd1, atol=1e-7)


def test_unobserved_arm_prediction_does_not_move_loss(rng):
    ds = make_causal(40)
    obj = CausalObjective()
    p = rng.normal(size=(40, 2))
    q = p.copy()
    q[ds.treatment == 1, 0] += 5.0
    q[ds.treatment == 0, 1] -= 5.0
    assert obj.loss(p, ds) == obj.loss(q, ds)


def _y_equals_t(n=20, seed=0):
    r = np.random.default_rng(seed)
    t = np.tile([0, 1], n // 2)
    return Dataset(r.normal(size=(n, 2)), t.astype(float), t)


def test_cxgboost_learns_unit_effect():
    model = fit_cxgboost(_y_equals_t(), TrainConfig(), "exact")
    np.testing.assert_allclose(predict_ite(model, _y_equals_t().features), 1.0, atol=0.05)


def test_all_treated_exact_keeps_control_at_base():
    ds = Dataset(np.arange(10.0)[:, None], np.linspace(0, 1, 10), np.ones(10, int))
    with pytest.warns(RuntimeWarning, match="treated"):
        model = fit_cxgboost(ds, TrainConfig(n_estimators=10, base_score=0.3), "exact")
    q0, _ = model.predict_potential(ds.features)
    np.testing.assert_array_equal(q0, 0.3)
    assert model.notes


def test_slearner_splits_on_treatment_first():
    ds = _y_equals_t()
    model = fit_slearner(ds, TrainConfig())
    assert model.engine_model.trees[0].feature[0] == ds.n_features
    assert estimate_ate(model, ds.features) == pytest.approx(1.0, abs=0.05)


def test_slearner_ignoring_treatment_has_zero_effect(rng):
    x = rng.normal(size=(100, 2))
    ds = Dataset(x, x[:, 0], rng.integers(0, 2, 100))
    model = fit_slearner(ds, TrainConfig(n_estimators=3, max_depth=1))
    trees = model.engine_model.trees
    assert all(ds.n_features not in set(t.feature) for t in trees)
    assert estimate_ate(model, x) == 0.0


def test_tlearner_y_equals_t():
    ds = _y_equals_t()
    q0, q1 = fit_tlearner(ds, TrainConfig()).predict_potential(ds.features)
    np.testing.assert_allclose(q0, 0.0, atol=1e-6)
    np.testing.assert_allclose(q1, 1.0, atol=1e-6)


def test_tlearner_identical_arms(rng):
    x = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    ds = Dataset(np.vstack([x, x]), np.concatenate([y, y]), np.repeat([0, 1], 30))
    model = fit_tlearner(ds, TrainConfig(n_estimators=20))
    assert abs(estimate_ate(model, x)) < 1e-6


def test_tlearner_single_row_arm_and_empty_arm():
    ds = Dataset(np.arange(5.0)[:, None], np.arange(5.0), np.array([0, 0, 0, 0, 1]))
    q0, q1 = fit_tlearner(ds, TrainConfig(n_estimators=5)).predict_potential(ds.features)
    assert np.ptp(q1) == 0.0
    with pytest.raises(ValueError, match="treated"):
        fit_tlearner(Dataset(np.zeros((3, 1)), np.zeros(3), np.zeros(3, int)))


def test_estimate_ate_mean_and_empty():
    class Stub:
        def predict_potential(self, x):
            return np.zeros(len(x)), np.array([0.5, 1.5])

    assert estimate_ate(Stub(), np.zeros((2, 1))) == 1.0
    with pytest.raises(ValueError):
        estimate_ate(Stub(), np.zeros((0, 1)))


def test_missing_rows_predict_finite():
    ds = make_causal(200, missing=0.2)
    model = fit_cxgboost(ds, TrainConfig(n_estimators=10))
    q0, q1 = model.predict_potential(np.full((3, ds.n_features), np.nan))
    assert np.isfinite(q0).all() and np.isfinite(q1).all()


@pytest.mark.parametrize("kind", ["cxgboost", "slearner", "tlearner"])
def test_save_load_roundtrip(tmp_path, kind):
    ds = make_causal(80)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        model = fit_estimator(kind, ds, TrainConfig(n_estimators=5), "exact")
    save_model(model, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    assert back.kind == kind
    for a, b in zip(model.predict_potential(ds.features), back.predict_potential(ds.features)):
        np.testing.assert_array_equal(a, b)
