"""Potential-outcome estimators built on the boosting engine.

``CXGBoost`` fits one ensemble whose trees carry two-value leaves: output 0
predicts the control-arm outcome Q(0, x) and output 1 the treated-arm
outcome Q(1, x). Each row contributes squared error only on the arm it was
observed under.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .gbt import GradHess, Model, SquaredError, TrainConfig, fit

logger = logging.getLogger(__name__)

MODEL_FORMAT = "cxgboost.causal"


class HessianMode(str, Enum):
    """How the second derivative of the causal loss is supplied.

    ``PAPER_LITERAL`` uses 2 for both outputs on every row. ``EXACT`` uses
    the true masked second derivative, 2 on the observed arm and 0 on the
    other.
    """

    PAPER_LITERAL = "paper-literal"
    EXACT = "exact"


def causal_loss(q0, q1, t, y):
    """Per-row loss ``(1-t)(q0-y)^2 + t(q1-y)^2``; works elementwise on arrays."""
    t = np.asarray(t, dtype=np.float64)
    return (1.0 - t) * np.square(np.subtract(q0, y)) + t * np.square(np.subtract(q1, y))


def causal_gradient(q0, q1, t, y):
    t = np.asarray(t, dtype=np.float64)
    g0 = 2.0 * (1.0 - t) * np.subtract(q0, y)
    g1 = 2.0 * t * np.subtract(q1, y)
    return g0, g1


def causal_hessian(t, mode: HessianMode | str = HessianMode.PAPER_LITERAL):
    mode = HessianMode(mode)
    t = np.asarray(t, dtype=np.float64)
    if mode is HessianMode.PAPER_LITERAL:
        two = np.full_like(t, 2.0)
        return two, two.copy()
    return 2.0 * (1.0 - t), 2.0 * t


class CausalObjective:
    """Two-output objective for the engine; dataset loss is the row mean."""

    n_outputs = 2

    def __init__(self, mode: HessianMode | str = HessianMode.PAPER_LITERAL):
        self.mode = HessianMode(mode)

    def gradient_hessian(self, preds, dataset: Dataset) -> GradHess:
        t, y = dataset.treatment, dataset.outcome
        g0, g1 = causal_gradient(preds[:, 0], preds[:, 1], t, y)
        h0, h1 = causal_hessian(t, self.mode)
        return GradHess(np.column_stack([g0, g1]), np.column_stack([h0, h1]))

    def loss(self, preds, dataset: Dataset) -> float:
        per_row = causal_loss(preds[:, 0], preds[:, 1], dataset.treatment, dataset.outcome)
        return float(np.mean(per_row))


@dataclass(frozen=True, eq=False)
class CausalModel:
    engine_model: Model
    hessian_mode: HessianMode = HessianMode.PAPER_LITERAL
    notes: tuple[str, ...] = field(default=())
    kind = "cxgboost"

    def __post_init__(self):
        if self.engine_model.n_outputs != 2:
            raise ValueError("a causal model needs exactly two outputs")

    @property
    def n_features(self) -> int:
        return self.engine_model.n_features

    def predict_potential(self, features) -> tuple[np.ndarray, np.ndarray]:
        out = self.engine_model.predict(features)
        return out[:, 0].copy(), out[:, 1].copy()

    def _payload(self) -> dict:
        return {"hessian_mode": self.hessian_mode.value, "engine": self.engine_model.to_dict()}


@dataclass(frozen=True, eq=False)
class SLearnerModel:
    """Single-output model on covariates with the treatment appended last."""

    engine_model: Model
    treatment_column: int
    kind = "slearner"

    def __post_init__(self):
        if self.treatment_column != self.engine_model.n_features - 1:
            raise ValueError("treatment column must be the last augmented column")

    @property
    def n_features(self) -> int:
        return self.treatment_column

    def predict_potential(self, features) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(features, dtype=np.float64)
        _check_width(x, self.n_features)
        q = []
        for arm in (0.0, 1.0):
            aug = np.column_stack([x, np.full(x.shape[0], arm)])
            q.append(self.engine_model.predict(aug)[:, 0])
        return q[0], q[1]

    def _payload(self) -> dict:
        return {"treatment_column": self.treatment_column, "engine": self.engine_model.to_dict()}


@dataclass(frozen=True, eq=False)
class TLearnerModel:
    model_control: Model
    model_treated: Model
    kind = "tlearner"

    def __post_init__(self):
        if self.model_control.n_features != self.model_treated.n_features:
            raise ValueError("T-learner submodels disagree on feature count")

    @property
    def n_features(self) -> int:
        return self.model_control.n_features

    def predict_potential(self, features) -> tuple[np.ndarray, np.ndarray]:
        return (
            self.model_control.predict(features)[:, 0],
            self.model_treated.predict(features)[:, 0],
        )

    def _payload(self) -> dict:
        return {
            "control": self.model_control.to_dict(),
            "treated": self.model_treated.to_dict(),
        }


AnyCausalModel = CausalModel | SLearnerModel | TLearnerModel


def _check_width(x: np.ndarray, d: int) -> None:
    if x.ndim != 2 or x.shape[1] != d:
        raise ValueError(f"model was trained on {d} features, got shape {x.shape}")


def _require_treatment(dataset: Dataset) -> np.ndarray:
    if dataset.treatment is None:
        raise ValueError("dataset has no treatment column")
    return dataset.treatment


def fit_cxgboost(
    dataset: Dataset,
    config: TrainConfig | None = None,
    mode: HessianMode | str = HessianMode.PAPER_LITERAL,
) -> CausalModel:
    """Fit the two-output estimator. The treatment is not offered as a split feature."""
    t = _require_treatment(dataset)
    notes = []
    if t.min() == t.max():
        arm = "treated" if t[0] == 1 else "control"
        notes.append(f"every row is {arm}; the other arm receives no gradient signal")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    engine = fit(dataset, CausalObjective(mode), config or TrainConfig())
    return CausalModel(engine, HessianMode(mode), tuple(notes))


def fit_slearner(dataset: Dataset, config: TrainConfig | None = None) -> SLearnerModel:
    t = _require_treatment(dataset)
    aug = dataset.with_features(np.column_stack([dataset.features, t.astype(np.float64)]))
    engine = fit(aug, SquaredError(), config or TrainConfig())
    return SLearnerModel(engine, treatment_column=dataset.n_features)


def fit_tlearner(dataset: Dataset, config: TrainConfig | None = None) -> TLearnerModel:
    t = _require_treatment(dataset)
    config = config or TrainConfig()
    sub = {}
    for arm, name in ((0, "control"), (1, "treated")):
        rows = np.flatnonzero(t == arm)
        if rows.size == 0:
            raise ValueError(f"T-learner: the {name} arm (t={arm}) has no rows")
        sub[name] = fit(dataset.subset(rows), SquaredError(), config)
    return TLearnerModel(sub["control"], sub["treated"])


def predict_potential(model: AnyCausalModel, features) -> tuple[np.ndarray, np.ndarray]:
    """Predicted (control, treated) outcomes, unclipped."""
    return model.predict_potential(features)


def predict_ite(model: AnyCausalModel, features) -> np.ndarray:
    q0, q1 = model.predict_potential(features)
    return q1 - q0


def estimate_ate(model: AnyCausalModel, features) -> float:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("cannot estimate an ATE from an empty feature matrix")
    return float(np.mean(predict_ite(model, x)))


ESTIMATORS = {
    "cxgboost": fit_cxgboost,
    "slearner": fit_slearner,
    "tlearner": fit_tlearner,
}


def fit_estimator(kind: str, dataset: Dataset, config: TrainConfig | None = None,
                  hessian_mode: HessianMode | str = HessianMode.PAPER_LITERAL) -> AnyCausalModel:
    if kind not in ESTIMATORS:
        raise ValueError(f"unknown estimator {kind!r}; choose from {sorted(ESTIMATORS)}")
    if kind == "cxgboost":
        return fit_cxgboost(dataset, config, hessian_mode)
    return ESTIMATORS[kind](dataset, config)


def save_model(model: AnyCausalModel, path: str | Path) -> None:
    doc = {"format": MODEL_FORMAT, "version": 1, "kind": model.kind, **model._payload()}
    if model.kind != "cxgboost":
        doc["hessian_mode"] = None
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path) -> AnyCausalModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    kind = doc.get("kind")
    if kind == "cxgboost":
        return CausalModel(Model.from_dict(doc["engine"]), HessianMode(doc["hessian_mode"]))
    if kind == "slearner":
        return SLearnerModel(Model.from_dict(doc["engine"]), int(doc["treatment_column"]))
    if kind == "tlearner":
        return TLearnerModel(Model.from_dict(doc["control"]), Model.from_dict(doc["treated"]))
    raise ValueError(f"{path}: unknown estimator kind {kind!r}")
