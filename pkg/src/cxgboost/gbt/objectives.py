from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np


@dataclass(frozen=True, eq=False)
class GradHess:
    """Per-row, per-output first and second derivatives of the loss."""

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.ascontiguousarray(self.g, dtype=np.float64)
        h = np.ascontiguousarray(self.h, dtype=np.float64)
        if g.ndim == 1:
            g, h = g[:, None], h[:, None]
        if g.shape != h.shape or g.ndim != 2:
            raise ValueError(f"gradient {g.shape} and hessian {h.shape} shapes differ")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    def check_finite(self) -> None:
        """Raise ``FloatingPointError`` naming the first bad (row, output)."""
        for name, a in (("gradient", self.g), ("hessian", self.h)):
            bad = ~np.isfinite(a)
            if bad.any():
                row, out = np.argwhere(bad)[0]
                raise FloatingPointError(
                    f"non-finite {name} {a[row, out]!r} at row {row}, output {out}"
                )
        if (self.h < 0).any():
            row, out = np.argwhere(self.h < 0)[0]
            raise FloatingPointError(f"negative hessian at row {row}, output {out}")


class Objective(Protocol):
    n_outputs: int

    def gradient_hessian(self, preds: np.ndarray, dataset) -> GradHess: ...

    def loss(self, preds: np.ndarray, dataset) -> float: ...


class SquaredError:
    """Mean squared error, ``g = 2(p - y)`` and ``h = 2``."""

    n_outputs = 1

    def gradient_hessian(self, preds, dataset) -> GradHess:
        resid = preds[:, 0] - dataset.outcome
        return GradHess(2.0 * resid, np.full_like(resid, 2.0))

    def loss(self, preds, dataset) -> float:
        return float(np.mean((preds[:, 0] - dataset.outcome) ** 2))
