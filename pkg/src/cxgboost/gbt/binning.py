"""Quantile binning of raw covariates into small integer codes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class BinMapper:
    """Per-feature ascending bin upper boundaries.

    A finite value ``v`` falls in the first bin whose boundary is ``>= v``;
    values above the last boundary land in the last bin. Missing values get
    the code ``missing_code`` which is shared by all features and sits one
    past the largest per-feature bin count. A feature with no finite
    training values has an empty boundary list and is never split on.
    """

    boundaries: tuple[np.ndarray, ...]
    has_missing: np.ndarray  # bool per feature, missing seen during fitting

    @property
    def n_features(self) -> int:
        return len(self.boundaries)

    @property
    def n_bins(self) -> np.ndarray:
        return np.array([len(b) for b in self.boundaries], dtype=np.int64)

    @property
    def missing_code(self) -> int:
        return int(self.n_bins.max(initial=0))

    @property
    def splittable(self) -> np.ndarray:
        return self.n_bins > 0

    def transform(self, features: np.ndarray) -> np.ndarray:
        """Return feature-major codes of shape (n_features, n_rows), int32."""
        x = np.asarray(features, dtype=np.float64)
        if x.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {x.shape[1]}")
        miss = self.missing_code
        codes = np.empty((self.n_features, x.shape[0]), dtype=np.int32)
        for j, bounds in enumerate(self.boundaries):
            col = x[:, j]
            nan = np.isnan(col)
            if len(bounds) == 0:
                codes[j] = miss
                continue
            c = np.searchsorted(bounds, col, side="left")
            np.minimum(c, len(bounds) - 1, out=c)
            c[nan] = miss
            codes[j] = c
        return codes


def _feature_boundaries(col: np.ndarray, max_bins: int) -> np.ndarray:
    finite = np.sort(col[~np.isnan(col)])
    if finite.size == 0:
        return np.empty(0)
    uniq = np.unique(finite)
    if uniq.size <= max_bins:
        return uniq
    m = finite.size
    # Upper edge of the i-th equal-count slice of the sorted values.
    pos = np.ceil(np.arange(1, max_bins + 1) * m / max_bins).astype(np.int64) - 1
    return np.unique(finite[pos])


def build_bin_mapper(data, max_bins: int = 256) -> BinMapper:
    """Fit bin boundaries from training covariates.

    Args:
        data: a :class:`~cxgboost.dataset.Dataset` or a raw feature matrix.
        max_bins: maximum number of finite-value bins per feature.
    """
    x = np.asarray(getattr(data, "features", data), dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("cannot bin an empty feature matrix")
    if not 2 <= max_bins <= 65535:
        raise ValueError(f"max_bins must lie in [2, 65535], got {max_bins}")
    bounds = tuple(_feature_boundaries(x[:, j], max_bins) for j in range(x.shape[1]))
    return BinMapper(bounds, np.isnan(x).any(axis=0))
