"""Depth-wise growth of multi-output trees from gradient histograms.

All outputs share one split structure. A candidate split is scored by the
second-order gain summed over outputs::

    gain = 1/2 * sum_k [ GL_k^2/(HL_k+lam) + GR_k^2/(HR_k+lam) - G_k^2/(H_k+lam) ]

and each leaf stores ``-G_k/(H_k+lam)`` scaled by the learning rate.
Terms whose denominator is zero (``lam == 0`` and no hessian mass) are
taken as zero, and so is the matching leaf weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit, prange

from .binning import BinMapper
from .config import TrainConfig
from .objectives import GradHess

LEAF = -1


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat node arrays; node 0 is the root.

    Internal nodes send a row left when ``x[feature] <= threshold`` or, for
    a missing value, when ``default_left`` is set. ``value`` holds the
    (already shrunk) leaf vectors and zeros for internal nodes.
    """

    feature: np.ndarray
    threshold: np.ndarray
    default_left: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_outputs(self) -> int:
        return self.value.shape[1]

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def apply(self, features: np.ndarray) -> np.ndarray:
        """Index of the leaf each row lands in."""
        x = np.asarray(features, dtype=np.float64)
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            v = x[active, self.feature[cur]]
            go_left = np.where(np.isnan(v), self.default_left[cur], v <= self.threshold[cur])
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.value[self.apply(features)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "default_left": self.default_left.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int32),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            default_left=np.asarray(d["default_left"], dtype=bool),
            left=np.asarray(d["left"], dtype=np.int32),
            right=np.asarray(d["right"], dtype=np.int32),
            value=np.asarray(d["value"], dtype=np.float64).reshape(len(d["feature"]), -1),
            gain=np.asarray(d["gain"], dtype=np.float64),
        )


class NodeHistogram(NamedTuple):
    """Gradient statistics of one node, binned per feature.

    ``grad``/``hess`` have shape (n_features, n_slots, n_outputs) and
    ``count`` (n_features, n_slots); the last slot collects missing values.
    """

    grad: np.ndarray
    hess: np.ndarray
    count: np.ndarray


def leaf_weight(g_sum: np.ndarray, h_sum: np.ndarray, reg_lambda: float) -> np.ndarray:
    den = np.asarray(h_sum, dtype=np.float64) + reg_lambda
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, -np.asarray(g_sum) / den, 0.0)


def _structure_score(g_sum, h_sum, reg_lambda) -> float:
    den = np.asarray(h_sum, dtype=np.float64) + reg_lambda
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.sum(np.where(den > 0, np.square(g_sum) / den, 0.0)))


def split_gain(g_left, h_left, g_right, h_right, reg_lambda: float) -> float:
    """Second-order gain of a split, summed over outputs."""
    g_left, h_left = np.atleast_1d(g_left), np.atleast_1d(h_left)
    g_right, h_right = np.atleast_1d(g_right), np.atleast_1d(h_right)
    return 0.5 * (
        _structure_score(g_left, h_left, reg_lambda)
        + _structure_score(g_right, h_right, reg_lambda)
        - _structure_score(g_left + g_right, h_left + h_right, reg_lambda)
    )


def find_default_direction(
    hist: NodeHistogram, feature: int, bin: int, reg_lambda: float = 1.0
) -> bool:
    """Return True when missing rows should go left for the split after ``bin``.

    Both placements are scored; ties (including the no-missing case) go left.
    """
    g, h = hist.grad[feature], hist.hess[feature]
    miss_g, miss_h = g[-1], h[-1]
    gl, hl = g[: bin + 1].sum(axis=0), h[: bin + 1].sum(axis=0)
    gr, hr = g[bin + 1 : -1].sum(axis=0), h[bin + 1 : -1].sum(axis=0)
    if hist.count[feature, -1] == 0:
        return True
    to_left = split_gain(gl + miss_g, hl + miss_h, gr, hr, reg_lambda)
    to_right = split_gain(gl, hl, gr + miss_g, hr + miss_h, reg_lambda)
    return bool(to_left >= to_right)


@njit(parallel=True, nogil=True, cache=True)
def _accumulate(codes, order, node_start, n_slots, gh):
    """Histograms laid out (feature, node, slot, [g_0..g_K-1, h_0..h_K-1])."""
    n_features = codes.shape[0]
    n_nodes = node_start.shape[0] - 1
    width = gh.shape[1]
    acc = np.zeros((n_features, n_nodes, n_slots, width))
    cnt = np.zeros((n_features, n_nodes, n_slots), dtype=np.int64)
    # One feature per thread and rows of a node visited in ascending order,
    # so every bin sum is bit-identical for any thread count.
    for f in prange(n_features):
        col = codes[f]
        for node in range(n_nodes):
            a = acc[f, node]
            c = cnt[f, node]
            for j in range(node_start[node], node_start[node + 1]):
                i = order[j]
                b = col[i]
                c[b] += 1
                for k in range(width):
                    a[b, k] += gh[i, k]
    return acc, cnt


@njit(nogil=True, cache=True)
def _node_totals(order, node_start, gh):
    n_nodes = node_start.shape[0] - 1
    tot = np.zeros((n_nodes, gh.shape[1]))
    for node in range(n_nodes):
        for j in range(node_start[node], node_start[node + 1]):
            i = order[j]
            for k in range(gh.shape[1]):
                tot[node, k] += gh[i, k]
    return tot


@njit(inline="always")
def _score(gsum, hsum, lam):
    s = 0.0
    for k in range(gsum.shape[0]):
        den = hsum[k] + lam
        if den > 0.0:
            s += gsum[k] * gsum[k] / den
    return s


@njit(parallel=True, nogil=True, cache=True)
def _find_splits(acc, cnt, node_tot, node_c, n_bins, lam, min_child_weight, min_gain):
    n_features, n_nodes, n_slots, width = acc.shape
    k_out = width // 2
    miss = n_slots - 1
    best_gain = np.full((n_nodes, n_features), -np.inf)
    best_bin = np.full((n_nodes, n_features), -1, dtype=np.int64)
    best_left = np.ones((n_nodes, n_features), dtype=np.bool_)
    for job in prange(n_nodes * n_features):
        f = job // n_nodes
        node = job % n_nodes
        nb = n_bins[f]
        if nb == 0 or node_c[node] < 2:
            continue
        gp = node_tot[node, :k_out]
        hp = node_tot[node, k_out:]
        parent = _score(gp, hp, lam)
        hist = acc[f, node]
        left = np.zeros(width)
        cl = 0
        mc = cnt[f, node, miss]
        gtry = np.empty(k_out)
        htry = np.empty(k_out)
        grest = np.empty(k_out)
        hrest = np.empty(k_out)
        for b in range(nb):
            for k in range(width):
                left[k] += hist[b, k]
            cl += cnt[f, node, b]
            # direction 0: missing left, direction 1: missing right
            for direction in range(2):
                if direction == 1 and mc == 0:
                    break
                c_left = cl + mc if direction == 0 else cl
                c_right = node_c[node] - c_left
                if c_left == 0 or c_right == 0:
                    continue
                hsum_l = 0.0
                hsum_r = 0.0
                for k in range(k_out):
                    if direction == 0:
                        gtry[k] = left[k] + hist[miss, k]
                        htry[k] = left[k_out + k] + hist[miss, k_out + k]
                    else:
                        gtry[k] = left[k]
                        htry[k] = left[k_out + k]
                    grest[k] = gp[k] - gtry[k]
                    hrest[k] = hp[k] - htry[k]
                    hsum_l += htry[k]
                    hsum_r += hrest[k]
                if hsum_l < min_child_weight or hsum_r < min_child_weight:
                    continue
                gain = 0.5 * (_score(gtry, htry, lam) + _score(grest, hrest, lam) - parent)
                if gain > min_gain and gain > best_gain[node, f]:
                    best_gain[node, f] = gain
                    best_bin[node, f] = b
                    best_left[node, f] = direction == 0
    return best_gain, best_bin, best_left


def _group_rows(row_node: np.ndarray, n_nodes: int):
    """Active row indices grouped by node (ascending within each node)."""
    active = np.flatnonzero(row_node >= 0)
    nodes = row_node[active]
    order = active[np.argsort(nodes, kind="stable")]
    node_start = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(nodes, minlength=n_nodes), out=node_start[1:])
    return order, node_start


class _Split(NamedTuple):
    feature: int
    bin: int
    default_left: bool
    gain: float


def _pick_best(best_gain, best_bin, best_left) -> list[_Split | None]:
    out = []
    for node in range(best_gain.shape[0]):
        row = best_gain[node]
        if not np.isfinite(row).any():
            out.append(None)
            continue
        f = int(np.argmax(row))  # first maximum -> lowest feature index
        out.append(_Split(f, int(best_bin[node, f]), bool(best_left[node, f]), float(row[f])))
    return out


def node_histogram(codes: np.ndarray, mapper: BinMapper, grad_hess: GradHess, rows=None) -> NodeHistogram:
    """Histogram of a single node, for inspection and tests."""
    row_node = np.full(codes.shape[1], -1, dtype=np.int64)
    row_node[np.arange(codes.shape[1]) if rows is None else rows] = 0
    order, node_start = _group_rows(row_node, 1)
    gh = np.hstack([grad_hess.g, grad_hess.h])
    acc, cnt = _accumulate(codes, order, node_start, mapper.missing_code + 1, gh)
    k_out = grad_hess.g.shape[1]
    return NodeHistogram(acc[:, 0, :, :k_out], acc[:, 0, :, k_out:], cnt[:, 0])


def grow_tree_with_leaves(
    codes: np.ndarray, mapper: BinMapper, grad_hess: GradHess, config: TrainConfig
) -> tuple[Tree, np.ndarray]:
    """Grow one tree and also return the leaf id reached by each training row."""
    n_rows, k_out = grad_hess.g.shape
    gh = np.ascontiguousarray(np.hstack([grad_hess.g, grad_hess.h]))
    lam = float(config.reg_lambda)
    shrink = float(config.learning_rate)
    n_slots = mapper.missing_code + 1
    n_bins = mapper.n_bins
    bounds = mapper.boundaries

    feature, threshold, default_left, left, right, value, gains = [], [], [], [], [], [], []

    def new_node():
        feature.append(LEAF)
        threshold.append(0.0)
        default_left.append(True)
        left.append(-1)
        right.append(-1)
        value.append(np.zeros(k_out))
        gains.append(0.0)
        return len(feature) - 1

    frontier = [new_node()]
    row_node = np.zeros(n_rows, dtype=np.int64)
    leaf_of_row = np.zeros(n_rows, dtype=np.int64)
    all_rows = np.arange(n_rows)

    for depth in range(config.max_depth + 1):
        n_front = len(frontier)
        order, node_start = _group_rows(row_node, n_front)
        tot = _node_totals(order, node_start, gh)
        tot_g, tot_h, tot_c = tot[:, :k_out], tot[:, k_out:], np.diff(node_start)
        if depth < config.max_depth:
            acc, cnt = _accumulate(codes, order, node_start, n_slots, gh)
            splits = _pick_best(
                *_find_splits(
                    acc, cnt, tot, tot_c, n_bins, lam,
                    float(config.min_child_weight), float(config.min_split_gain),
                )
            )
        else:
            splits = [None] * n_front

        next_frontier = []
        split_feat = np.full(n_front, -1, dtype=np.int64)
        split_bin = np.zeros(n_front, dtype=np.int64)
        split_dl = np.zeros(n_front, dtype=bool)
        child_slot = np.zeros((n_front, 2), dtype=np.int32)
        for j, node_id in enumerate(frontier):
            s = splits[j]
            if s is None:
                value[node_id] = leaf_weight(tot_g[j], tot_h[j], lam) * shrink
                continue
            feature[node_id] = s.feature
            threshold[node_id] = float(bounds[s.feature][s.bin])
            default_left[node_id] = s.default_left
            gains[node_id] = s.gain
            left[node_id] = new_node()
            right[node_id] = new_node()
            child_slot[j] = (len(next_frontier), len(next_frontier) + 1)
            next_frontier += [left[node_id], right[node_id]]
            split_feat[j], split_bin[j], split_dl[j] = s.feature, s.bin, s.default_left

        active = row_node >= 0
        slot = row_node[active]
        rows = all_rows[active]
        settled = split_feat[slot] < 0
        leaf_of_row[rows[settled]] = np.asarray(frontier, dtype=np.int64)[slot[settled]]
        row_node[rows[settled]] = -1

        moving, mslot = rows[~settled], slot[~settled]
        if moving.size:
            code = codes[split_feat[mslot], moving]
            is_miss = code == mapper.missing_code
            go_left = np.where(is_miss, split_dl[mslot], code <= split_bin[mslot])
            row_node[moving] = np.where(go_left, child_slot[mslot, 0], child_slot[mslot, 1])
        frontier = next_frontier
        if not frontier:
            break

    tree = Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        default_left=np.asarray(default_left, dtype=bool),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.vstack(value),
        gain=np.asarray(gains, dtype=np.float64),
    )
    return tree, leaf_of_row


def grow_tree(
    codes: np.ndarray, mapper: BinMapper, grad_hess: GradHess, config: TrainConfig
) -> Tree:
    """Grow a single tree on binned covariates.

    Args:
        codes: feature-major bin codes from :meth:`BinMapper.transform`.
        mapper: the mapper that produced ``codes``.
        grad_hess: per-row derivatives, one column per output.
        config: depth, regularisation and shrinkage settings.
    """
    return grow_tree_with_leaves(codes, mapper, grad_hess, config)[0]
