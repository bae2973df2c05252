"""Friedman Aligned-Ranks omnibus test and Finner step-down post-hoc."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special
from scipy.stats import rankdata

from .table import MetricsTable


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail of the chi-squared distribution."""
    if int(dof) != dof or dof < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {dof}")
    if x < 0:
        raise ValueError("chi-squared statistic must be nonnegative")
    return float(special.gammaincc(dof / 2.0, x / 2.0))


def norm_sf(z: float) -> float:
    """Upper tail of the standard normal distribution."""
    return float(0.5 * special.erfc(z / np.sqrt(2.0)))


@dataclass(frozen=True)
class Comparison:
    model: str
    z: float
    p_value: float
    p_adjusted: float
    reject: bool


@dataclass(frozen=True)
class FarReport:
    model_ids: tuple[str, ...]
    n_datasets: int
    rank_sums: tuple[float, ...]
    average_ranks: tuple[float, ...]
    statistic: float
    degrees_of_freedom: int
    p_value: float
    control: str | None = None
    alpha: float | None = None
    comparisons: tuple[Comparison, ...] = field(default=())

    @property
    def n_models(self) -> int:
        return len(self.model_ids)

    def to_dict(self) -> dict:
        return {
            "test": "friedman-aligned-ranks",
            "posthoc": "finner" if self.control is not None else None,
            "model_ids": list(self.model_ids),
            "n_datasets": self.n_datasets,
            "rank_sums": list(self.rank_sums),
            "average_ranks": list(self.average_ranks),
            "statistic": self.statistic,
            "degrees_of_freedom": self.degrees_of_freedom,
            "p_value": self.p_value,
            "control": self.control,
            "alpha": self.alpha,
            "comparisons": [c.__dict__ for c in self.comparisons],
        }


def aligned_ranks(values: np.ndarray) -> np.ndarray:
    """Joint average ranks of the row-mean-aligned observations, shape (n, k)."""
    v = np.asarray(values, dtype=np.float64)
    aligned = v - v.mean(axis=1, keepdims=True)
    return rankdata(aligned.ravel(), method="average").reshape(v.shape)


def far_statistic(values: np.ndarray) -> float:
    """Hodges-Lehmann aligned-ranks statistic, chi-squared with k-1 dof under H0."""
    n, k = values.shape
    r = aligned_ranks(values)
    model_sums = r.sum(axis=0)
    row_sums = r.sum(axis=1)
    kn = k * n
    num = (k - 1) * (np.sum(model_sums**2) - (k * n**2 / 4.0) * (kn + 1) ** 2)
    den = kn * (kn + 1) * (2 * kn + 1) / 6.0 - np.sum(row_sums**2) / k
    if den <= 0:
        return 0.0
    # Cauchy-Schwarz makes the numerator nonnegative; clip rounding noise.
    return float(max(num / den, 0.0))


def far_test(table: MetricsTable) -> FarReport:
    n, k = table.values.shape
    if n < 2 or k < 2:
        raise ValueError(f"aligned-ranks test needs >= 2 datasets and >= 2 models, got {n}x{k}")
    r = aligned_ranks(table.values)
    stat = far_statistic(table.values)
    sums = r.sum(axis=0)
    return FarReport(
        model_ids=table.model_ids,
        n_datasets=n,
        rank_sums=tuple(float(s) for s in sums),
        average_ranks=tuple(float(s) / n for s in sums),
        statistic=stat,
        degrees_of_freedom=k - 1,
        p_value=chi2_sf(stat, k - 1),
    )


def finner_adjust(p_values) -> np.ndarray:
    """Finner step-down adjusted p-values, returned in the input order.

    With p sorted ascending and m comparisons,
    ``APV_i = max_{j<=i} min(1, 1 - (1 - p_(j)) ** (m / j))``.
    """
    p = np.asarray(p_values, dtype=np.float64)
    m = p.size
    order = np.argsort(p, kind="stable")
    j = np.arange(1, m + 1)
    raw = np.minimum(1.0, 1.0 - (1.0 - p[order]) ** (m / j))
    adj_sorted = np.maximum.accumulate(raw)
    out = np.empty(m)
    out[order] = adj_sorted
    return out


def rank_standard_error(n_datasets: int, n_models: int) -> float:
    """Standard error of a difference of two average aligned ranks."""
    k, n = n_models, n_datasets
    return float(np.sqrt(k * (n * k + 1) / 6.0))


def finner_posthoc(report: FarReport, alpha: float = 0.05) -> FarReport:
    """Compare every model with the best-ranked one (lowest average rank)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    avg = np.asarray(report.average_ranks)
    ctrl = int(np.argmin(avg))
    se = rank_standard_error(report.n_datasets, report.n_models)
    others = [i for i in range(report.n_models) if i != ctrl]
    z = (avg[others] - avg[ctrl]) / se
    p = np.array([min(1.0, 2.0 * norm_sf(abs(zi))) for zi in z])
    apv = finner_adjust(p)
    comps = sorted(
        (
            Comparison(report.model_ids[i], float(zi), float(pi), float(ai), bool(ai <= alpha))
            for i, zi, pi, ai in zip(others, z, p, apv)
        ),
        key=lambda c: (c.p_value, report.model_ids.index(c.model)),
    )
    return replace(report, control=report.model_ids[ctrl], alpha=alpha, comparisons=tuple(comps))


def format_far_table(report: FarReport) -> str:
    """Plain-text summary: model, average aligned rank, adjusted p, H0 decision."""
    lines = [
        f"Friedman Aligned-Ranks: T = {report.statistic:.4f}, "
        f"dof = {report.degrees_of_freedom}, p = {report.p_value:.6g}",
        f"{'Model':<20} {'FAR':>10} {'p_F-value':>12}  H0",
    ]
    order = np.argsort(report.average_ranks, kind="stable")
    by_model = {c.model: c for c in report.comparisons}
    for i in order:
        name = report.model_ids[i]
        c = by_model.get(name)
        if c is None:
            lines.append(f"{name:<20} {report.average_ranks[i]:>10.2f} {'-':>12}  -")
        else:
            verdict = "Reject" if c.reject else "Failed to reject"
            lines.append(f"{name:<20} {report.average_ranks[i]:>10.2f} {c.p_adjusted:>12.6f}  {verdict}")
    return "\n".join(lines)
