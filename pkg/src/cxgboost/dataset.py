"""Tabular dataset container and its CSV representation.

Missing covariates are stored as NaN. On disk a missing cell is an empty
field; ``NA`` is accepted on read.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MISSING_TOKENS = frozenset({"", "NA"})


class DatasetFormatError(ValueError):
    """Raised for malformed CSV input; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Covariates, optional treatment, outcome and optional ground truth.

    Attributes:
        features: float64 matrix (n_rows, n_features); NaN marks missing.
        outcome: float64 vector of finite values.
        treatment: int8 vector of 0/1, or None for plain regression data.
        mu0: noiseless control-arm mean per row, or None.
        mu1: noiseless treated-arm mean per row, or None.
    """

    features: np.ndarray
    outcome: np.ndarray
    treatment: np.ndarray | None = None
    mu0: np.ndarray | None = None
    mu1: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {x.shape}")
        if np.isinf(x).any():
            raise ValueError("features contain +/-inf; use NaN for missing values")
        n = x.shape[0]
        y = np.asarray(self.outcome, dtype=np.float64).reshape(-1)
        if y.shape[0] != n:
            raise ValueError(f"outcome has {y.shape[0]} rows, features have {n}")
        if not np.isfinite(y).all():
            raise ValueError("outcome contains missing or non-finite values")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "outcome", y)

        if self.treatment is not None:
            t = np.asarray(self.treatment).reshape(-1)
            if t.shape[0] != n:
                raise ValueError(f"treatment has {t.shape[0]} rows, features have {n}")
            if not np.isin(t, (0, 1)).all():
                raise ValueError("treatment must contain only 0 or 1")
            object.__setattr__(self, "treatment", t.astype(np.int8))

        if (self.mu0 is None) != (self.mu1 is None):
            raise ValueError("mu0 and mu1 must be given together")
        for name in ("mu0", "mu1"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=np.float64).reshape(-1)
            if v.shape[0] != n or not np.isfinite(v).all():
                raise ValueError(f"{name} must be a finite vector of length {n}")
            object.__setattr__(self, name, v)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def has_ground_truth(self) -> bool:
        return self.mu0 is not None

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        pick = lambda a: None if a is None else a[rows]  # noqa: E731
        return Dataset(
            features=self.features[rows],
            outcome=self.outcome[rows],
            treatment=pick(self.treatment),
            mu0=pick(self.mu0),
            mu1=pick(self.mu1),
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.outcome, self.treatment, self.mu0, self.mu1)

    def equals(self, other: "Dataset") -> bool:
        """Field-for-field equality, treating NaN cells as equal."""

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b, equal_nan=True)

        return (
            same(self.features, other.features)
            and same(self.outcome, other.outcome)
            and same(self.treatment, other.treatment)
            and same(self.mu0, other.mu0)
            and same(self.mu1, other.mu1)
        )


def _fmt(v: float) -> str:
    if np.isnan(v):
        return ""
    return format(float(v), ".17g")


def dataset_to_csv(dataset: Dataset) -> str:
    d = dataset.n_features
    header = [f"x{j}" for j in range(d)]
    if dataset.treatment is not None:
        header.append("t")
    header.append("y")
    if dataset.has_ground_truth:
        header += ["mu0", "mu1"]

    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for i in range(dataset.n_rows):
        cells = [_fmt(v) for v in dataset.features[i]]
        if dataset.treatment is not None:
            cells.append(str(int(dataset.treatment[i])))
        cells.append(_fmt(dataset.outcome[i]))
        if dataset.has_ground_truth:
            cells += [_fmt(dataset.mu0[i]), _fmt(dataset.mu1[i])]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def write_csv(dataset: Dataset, path: str | Path) -> None:
    """Write ``x0..x{d-1},t,y[,mu0,mu1]`` with 17 significant digits, LF endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(dataset))


def read_csv(path: str | Path) -> Dataset:
    """Read a dataset written by :func:`write_csv` or an ACIC-style export.

    Columns named ``t``, ``y``, ``mu0`` and ``mu1`` are recognised by name;
    every other column is a covariate, kept in file order. ``t`` and the
    ground-truth pair are optional.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        return _parse_csv(fh)


def _parse_csv(fh) -> Dataset:
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DatasetFormatError("empty file", 1) from None
    if "y" not in header:
        raise DatasetFormatError("missing required column 'y'", 1)
    if ("mu0" in header) != ("mu1" in header):
        raise DatasetFormatError("columns mu0 and mu1 must appear together", 1)
    if len(set(header)) != len(header):
        raise DatasetFormatError("duplicate column names", 1)

    special = {"t", "y", "mu0", "mu1"}
    feat_cols = [j for j, h in enumerate(header) if h not in special]
    col = {h: j for j, h in enumerate(header)}

    x_rows, t_vals, y_vals, mu0_vals, mu1_vals = [], [], [], [], []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DatasetFormatError(
                f"expected {len(header)} fields, found {len(row)}", line_no
            )
        try:
            x_rows.append([_parse_cell(row[j], missing_ok=True) for j in feat_cols])
            y_vals.append(_parse_cell(row[col["y"]]))
            if "mu0" in col:
                mu0_vals.append(_parse_cell(row[col["mu0"]]))
                mu1_vals.append(_parse_cell(row[col["mu1"]]))
        except ValueError as exc:
            raise DatasetFormatError(str(exc), line_no) from None
        if "t" in col:
            raw = row[col["t"]].strip()
            if raw not in ("0", "1", "0.0", "1.0"):
                raise DatasetFormatError(f"treatment must be 0 or 1, got {raw!r}", line_no)
            t_vals.append(int(float(raw)))

    n = len(y_vals)
    features = np.array(x_rows, dtype=np.float64).reshape(n, len(feat_cols))
    return Dataset(
        features=features,
        outcome=np.array(y_vals, dtype=np.float64),
        treatment=np.array(t_vals, dtype=np.int8) if "t" in col else None,
        mu0=np.array(mu0_vals) if "mu0" in col else None,
        mu1=np.array(mu1_vals) if "mu1" in col else None,
    )


def _parse_cell(raw: str, missing_ok: bool = False) -> float:
    raw = raw.strip()
    if raw in MISSING_TOKENS:
        if missing_ok:
            return np.nan
        raise ValueError("missing value in a column that must be complete")
    try:
        v = float(raw)
    except ValueError:
        raise ValueError(f"non-numeric value {raw!r}") from None
    if np.isinf(v) or (np.isnan(v) and not missing_ok):
        raise ValueError(f"non-finite value {raw!r}")
    return v
