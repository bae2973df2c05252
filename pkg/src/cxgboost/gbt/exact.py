"""Brute-force split enumeration on raw covariate values.

Every distinct finite value of every feature at a node is tried as a
threshold, with missing rows sent left and then right; child sums are
recomputed from the rows directly. This is slow by design and serves as a
reference for the histogram path.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .config import TrainConfig
from .objectives import GradHess
from .tree import LEAF, Tree

_CHUNK = 256


class ExactSplit(NamedTuple):
    feature: int
    threshold: float
    default_left: bool
    gain: float


def _score(gs: np.ndarray, hs: np.ndarray, lam: float) -> np.ndarray:
    """Sum over outputs of G^2/(H+lam) along the last axis; zero where H+lam == 0."""
    den = hs + lam
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, gs * gs / safe, 0.0).sum(axis=-1)


def best_split_exact(
    features: np.ndarray, g: np.ndarray, h: np.ndarray, config: TrainConfig
) -> ExactSplit | None:
    """Exhaustively search all (feature, threshold, missing side) candidates.

    Candidates are visited feature by feature, thresholds ascending, missing
    side left before right; on equal gain the earliest candidate wins.
    """
    lam = float(config.reg_lambda)
    n = features.shape[0]
    if n < 2:
        return None
    parent = float(_score(g.sum(axis=0), h.sum(axis=0), lam))
    best: ExactSplit | None = None
    best_gain = -np.inf

    for f in range(features.shape[1]):
        col = features[:, f]
        miss = np.isnan(col)
        vals = np.unique(col[~miss])
        for start in range(0, vals.size, _CHUNK):
            thr = vals[start : start + _CHUNK]
            le = (col[None, :] <= thr[:, None]) & ~miss[None, :]
            per_side = []
            for missing_left in (True, False):
                mask = le | miss[None, :] if missing_left else le
                maskf = mask.astype(np.float64)
                c_left = mask.sum(axis=1)
                gl, hl = maskf @ g, maskf @ h
                gr, hr = (1.0 - maskf) @ g, (1.0 - maskf) @ h
                gain = 0.5 * (_score(gl, hl, lam) + _score(gr, hr, lam) - parent)
                ok = (
                    (c_left > 0)
                    & (c_left < n)
                    & (hl.sum(axis=1) >= config.min_child_weight)
                    & (hr.sum(axis=1) >= config.min_child_weight)
                    & (gain > config.min_split_gain)
                )
                per_side.append(np.where(ok, gain, -np.inf))
            cands = np.stack(per_side, axis=1).ravel()  # thr0-L, thr0-R, thr1-L, ...
            i = int(np.argmax(cands))
            if cands[i] > best_gain:
                best_gain = float(cands[i])
                best = ExactSplit(f, float(thr[i // 2]), i % 2 == 0, best_gain)
    return best


def grow_tree_exact(features: np.ndarray, grad_hess: GradHess, config: TrainConfig) -> Tree:
    """Depth-wise tree growth using :func:`best_split_exact` at every node."""
    x = np.asarray(features, dtype=np.float64)
    g, h = grad_hess.g, grad_hess.h
    k_out = g.shape[1]
    lam = float(config.reg_lambda)

    nodes: list[dict] = []

    def new_node(rows):
        nodes.append(dict(rows=rows, feature=LEAF, threshold=0.0, default_left=True,
                          left=-1, right=-1, value=np.zeros(k_out), gain=0.0))
        return len(nodes) - 1

    frontier = [new_node(np.arange(x.shape[0]))]
    for depth in range(config.max_depth + 1):
        nxt = []
        for nid in frontier:
            rows = nodes[nid]["rows"]
            split = None
            if depth < config.max_depth:
                split = best_split_exact(x[rows], g[rows], h[rows], config)
            if split is None:
                den = h[rows].sum(axis=0) + lam
                gs = g[rows].sum(axis=0)
                w = np.where(den > 0, -gs / np.where(den > 0, den, 1.0), 0.0)
                nodes[nid]["value"] = w * config.learning_rate
                continue
            v = x[rows, split.feature]
            go_left = np.where(np.isnan(v), split.default_left, v <= split.threshold)
            node = nodes[nid]
            node.update(feature=split.feature, threshold=split.threshold,
                        default_left=split.default_left, gain=split.gain)
            node["left"] = new_node(rows[go_left])
            node["right"] = new_node(rows[~go_left])
            nxt += [node["left"], node["right"]]
        frontier = nxt
        if not frontier:
            break

    return Tree(
        feature=np.array([n["feature"] for n in nodes], dtype=np.int32),
        threshold=np.array([n["threshold"] for n in nodes], dtype=np.float64),
        default_left=np.array([n["default_left"] for n in nodes], dtype=bool),
        left=np.array([n["left"] for n in nodes], dtype=np.int32),
        right=np.array([n["right"] for n in nodes], dtype=np.int32),
        value=np.vstack([n["value"] for n in nodes]),
        gain=np.array([n["gain"] for n in nodes], dtype=np.float64),
    )
