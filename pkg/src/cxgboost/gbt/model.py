from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from numba import njit, prange

from .binning import build_bin_mapper
from .config import TrainConfig
from .objectives import Objective
from .tree import LEAF, Tree, grow_tree_with_leaves

logger = logging.getLogger(__name__)

FORMAT_NAME = "cxgboost.gbt"
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Model:
    """A fitted tree ensemble.

    ``predict(x) = base_score + sum of leaf vectors``; leaf values are stored
    after shrinkage. ``train_loss[i]`` is the training loss after tree ``i``.
    """

    n_features: int
    base_score: np.ndarray
    trees: tuple[Tree, ...]
    config: TrainConfig
    train_loss: tuple[float, ...] = field(default=())

    @property
    def n_outputs(self) -> int:
        return len(self.base_score)

    @cached_property
    def _flat(self):
        offsets = np.cumsum([0] + [t.n_nodes for t in self.trees])
        k_out = self.n_outputs

        def cat(attr, dtype):
            parts = [getattr(t, attr) for t in self.trees]
            return np.concatenate(parts).astype(dtype) if parts else np.empty(0, dtype)

        # child indices become absolute positions in the concatenated arrays
        left = np.concatenate([t.left + o for t, o in zip(self.trees, offsets)]) if self.trees else np.empty(0)
        right = np.concatenate([t.right + o for t, o in zip(self.trees, offsets)]) if self.trees else np.empty(0)
        value = np.vstack([t.value for t in self.trees]) if self.trees else np.empty((0, k_out))
        return (
            offsets[:-1].astype(np.int64),
            cat("feature", np.int64),
            cat("threshold", np.float64),
            cat("default_left", np.bool_),
            left.astype(np.int64),
            right.astype(np.int64),
            np.ascontiguousarray(value, dtype=np.float64),
        )

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Return predictions of shape (n_rows, n_outputs)."""
        return predict(self, features)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "n_features": self.n_features,
            "n_outputs": self.n_outputs,
            "base_score": self.base_score.tolist(),
            "config": self.config.to_dict(),
            "train_loss": list(self.train_loss),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Model":
        if d.get("format") != FORMAT_NAME:
            raise ValueError(f"not a {FORMAT_NAME} document")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        trees = tuple(Tree.from_dict(t) for t in d["trees"])
        model = cls(
            n_features=int(d["n_features"]),
            base_score=np.asarray(d["base_score"], dtype=np.float64),
            trees=trees,
            config=TrainConfig.from_dict(d["config"]),
            train_loss=tuple(d.get("train_loss", ())),
        )
        for t in trees:
            if t.n_outputs != model.n_outputs:
                raise ValueError("tree leaf width does not match n_outputs")
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Model":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@njit(parallel=True, nogil=True, cache=True)
def _predict_flat(x, base, roots, feature, threshold, default_left, left, right, value):
    n = x.shape[0]
    k_out = base.shape[0]
    out = np.empty((n, k_out))
    for i in prange(n):
        for k in range(k_out):
            out[i, k] = base[k]
        for r in range(roots.shape[0]):
            node = roots[r]
            while feature[node] != -1:
                v = x[i, feature[node]]
                if np.isnan(v):
                    go_left = default_left[node]
                else:
                    go_left = v <= threshold[node]
                node = left[node] if go_left else right[node]
            for k in range(k_out):
                out[i, k] += value[node, k]
    return out


def predict(model: Model, features: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(
            f"model was trained on {model.n_features} features, got shape {x.shape}"
        )
    return _predict_flat(x, model.base_score, *model._flat)


def fit(dataset, objective: Objective, config: TrainConfig | None = None) -> Model:
    """Newton boosting: one tree per round fitted to the objective's derivatives.

    Raises:
        FloatingPointError: the objective produced a non-finite gradient or
            hessian; the message names the row and output.
    """
    config = config or TrainConfig()
    k_out = int(objective.n_outputs)
    mapper = build_bin_mapper(dataset.features, config.max_bins)
    codes = mapper.transform(dataset.features)

    base = np.full(k_out, float(config.base_score))
    preds = np.tile(base, (dataset.n_rows, 1))
    trees, losses = [], []
    for it in range(config.n_estimators):
        gh = objective.gradient_hessian(preds, dataset)
        if gh.g.shape != (dataset.n_rows, k_out):
            raise ValueError(
                f"objective returned shape {gh.g.shape}, expected {(dataset.n_rows, k_out)}"
            )
        try:
            gh.check_finite()
        except FloatingPointError as exc:
            raise FloatingPointError(f"boosting round {it}: {exc}") from None
        tree, leaf_of_row = grow_tree_with_leaves(codes, mapper, gh, config)
        preds += tree.value[leaf_of_row]
        trees.append(tree)
        losses.append(float(objective.loss(preds, dataset)))
        logger.debug("round %d loss %.6g leaves %d", it, losses[-1], int((tree.feature == LEAF).sum()))

    return Model(
        n_features=dataset.n_features,
        base_score=base,
        trees=tuple(trees),
        config=config,
        train_loss=tuple(losses),
    )
