from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class MetricsTable:
    """Datasets x models matrix of one lower-is-better metric."""

    dataset_ids: tuple[str, ...]
    model_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "dataset_ids", tuple(str(d) for d in self.dataset_ids))
        object.__setattr__(self, "model_ids", tuple(str(m) for m in self.model_ids))
        if v.shape != (len(self.dataset_ids), len(self.model_ids)):
            raise ValueError(
                f"values shape {v.shape} does not match "
                f"{len(self.dataset_ids)} datasets x {len(self.model_ids)} models"
            )
        if not np.isfinite(v).all():
            raise ValueError("metrics table has missing or non-finite entries")
        if (v < 0).any():
            raise ValueError("metrics table values must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def n_datasets(self) -> int:
        return len(self.dataset_ids)

    @property
    def n_models(self) -> int:
        return len(self.model_ids)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset_id", *self.model_ids])
        for did, row in zip(self.dataset_ids, self.values):
            w.writerow([did, *(format(float(v), ".17g") for v in row)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="")

    @classmethod
    def read_csv(cls, path: str | Path) -> "MetricsTable":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][:1] != ["dataset_id"]:
            raise ValueError(f"{path}: first column must be 'dataset_id'")
        header, body = rows[0], [r for r in rows[1:] if r]
        for lineno, r in enumerate(body, start=2):
            if len(r) != len(header):
                raise ValueError(f"{path}: line {lineno}: expected {len(header)} fields")
        return cls(
            dataset_ids=tuple(r[0] for r in body),
            model_ids=tuple(header[1:]),
            values=np.array([[float(v) for v in r[1:]] for r in body]).reshape(len(body), -1),
        )
