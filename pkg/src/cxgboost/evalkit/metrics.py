"""Treatment-effect error metrics against known potential-outcome means."""

from __future__ import annotations

import numpy as np


def _effects(mu0, mu1, q0, q1) -> tuple[np.ndarray, np.ndarray]:
    arrs = [np.asarray(a, dtype=np.float64).reshape(-1) for a in (mu0, mu1, q0, q1)]
    n = arrs[0].shape[0]
    if any(a.shape[0] != n for a in arrs):
        raise ValueError(f"length mismatch: {[a.shape[0] for a in arrs]}")
    if n == 0:
        raise ValueError("metrics need at least one row")
    return arrs[1] - arrs[0], arrs[3] - arrs[2]


def abs_error_ate(mu0, mu1, q0, q1) -> float:
    """``|mean(mu1 - mu0) - mean(q1 - q0)|``."""
    true_ite, pred_ite = _effects(mu0, mu1, q0, q1)
    return float(abs(true_ite.mean() - pred_ite.mean()))


def pehe(mu0, mu1, q0, q1) -> float:
    """Mean squared error of the per-row effect. No square root is taken."""
    true_ite, pred_ite = _effects(mu0, mu1, q0, q1)
    return float(np.mean((true_ite - pred_ite) ** 2))


METRICS = {"ate": abs_error_ate, "pehe": pehe}
