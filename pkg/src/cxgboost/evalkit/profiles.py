"""Dolan-More performance profiles on a log10 ratio axis."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .table import MetricsTable


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """Step curve: ``rho[i]`` is the share of datasets with log10 ratio <= ``tau[i]``."""

    model: str
    tau: np.ndarray
    rho: np.ndarray

    def at(self, tau: float) -> float:
        i = np.searchsorted(self.tau, tau, side="right") - 1
        return float(self.rho[i]) if i >= 0 else 0.0

    def to_dict(self) -> dict:
        return {"model": self.model, "tau": self.tau.tolist(), "rho": self.rho.tolist()}


def log_ratios(table: MetricsTable, epsilon: float = 1e-12) -> np.ndarray:
    """log10 of each value over its dataset's best value, both floored at ``epsilon``."""
    v = np.maximum(table.values, epsilon)
    best = np.maximum(table.values.min(axis=1, keepdims=True), epsilon)
    return np.log10(v / best)


def performance_profile(table: MetricsTable, epsilon: float = 1e-12) -> list[ProfileCurve]:
    if table.n_models < 2:
        raise ValueError("performance profiles need at least two models")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    r = log_ratios(table, epsilon)
    grid = np.unique(np.concatenate([[0.0], r.ravel()]))
    n = table.n_datasets
    curves = []
    for j, model in enumerate(table.model_ids):
        srt = np.sort(r[:, j])
        rho = np.searchsorted(srt, grid, side="right") / n
        curves.append(ProfileCurve(model, grid.copy(), rho))
    return curves


def profiles_to_long_csv(curves: list[ProfileCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "tau", "rho"])
    for c in curves:
        for t, p in zip(c.tau, c.rho):
            w.writerow([c.model, format(float(t), ".17g"), format(float(p), ".17g")])
    return buf.getvalue()
