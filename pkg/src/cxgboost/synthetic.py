"""Toy causal datasets driven by a hidden binary confounder.

Per row::

    w ~ Bernoulli(0.5)
    t | w ~ Bernoulli(0.75 w + 0.25 (1 - w))
    x_j | w ~ Normal(mean=w, variance=sigma_z1^2 w + sigma_z0^2 (1 - w)),  j = 1..d
    y | t, w ~ Bernoulli(sigmoid(3 (w + 2 (2t - 1))))

The stored ground truth is the noiseless pair mu0 = sigmoid(3(w - 2)),
mu1 = sigmoid(3(w + 2)). ``w`` itself is never emitted as a covariate.

Each kind of draw (w, t, x, y, split) has its own PCG64 stream derived from
the seed, so changing ``n_covariates`` leaves w, t and y untouched.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .dataset import Dataset, write_csv

RNG_NAME = "numpy.random.PCG64(SeedSequence(seed, spawn_key=(stream,)))"
_STREAMS = {"w": 0, "t": 1, "x": 2, "y": 3, "split": 4}


@dataclass(frozen=True)
class GenConfig:
    n_samples: int = 5000
    n_covariates: int = 25
    sigma_z0: float = 3.0
    sigma_z1: float = 5.0
    seed: int = 0
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if self.n_covariates < 1:
            raise ValueError("n_covariates must be >= 1")
        if self.sigma_z0 <= 0 or self.sigma_z1 <= 0:
            raise ValueError("sigmas must be positive")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in [0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")

    @property
    def n_test(self) -> int:
        return int(round(self.test_fraction * self.n_samples))


def _stream(seed: int, name: str) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_STREAMS[name],))
    return np.random.Generator(np.random.PCG64(ss))


def population_ate() -> float:
    """E[mu1 - mu0] with w ~ Bernoulli(0.5)."""
    return float(0.5 * (expit(9) + expit(6)) - 0.5 * (expit(-3) + expit(-6)))


def generate_full(config: GenConfig) -> tuple[Dataset, np.ndarray]:
    """All rows before the train/test split, plus the hidden confounder."""
    n, d, seed = config.n_samples, config.n_covariates, config.seed
    w = (_stream(seed, "w").random(n) < 0.5).astype(np.int8)
    t = (_stream(seed, "t").random(n) < np.where(w == 1, 0.75, 0.25)).astype(np.int8)
    sd = np.where(w == 1, config.sigma_z1, config.sigma_z0)
    x = w[:, None] + sd[:, None] * _stream(seed, "x").standard_normal((n, d))
    p_y = expit(3.0 * (w + 2.0 * (2.0 * t - 1.0)))
    y = (_stream(seed, "y").random(n) < p_y).astype(np.float64)
    mu0 = expit(3.0 * (w - 2.0))
    mu1 = expit(3.0 * (w + 2.0))
    return Dataset(x, y, t, mu0, mu1), w


def split_indices(config: GenConfig) -> tuple[np.ndarray, np.ndarray]:
    perm = _stream(config.seed, "split").permutation(config.n_samples)
    test = np.sort(perm[: config.n_test])
    train = np.sort(perm[config.n_test :])
    return train, test


def generate_synthetic(config: GenConfig, return_hidden: bool = False):
    """Return ``(train, test)`` datasets; with ``return_hidden`` also ``(w_train, w_test)``."""
    full, w = generate_full(config)
    train_idx, test_idx = split_indices(config)
    out = (full.subset(train_idx), full.subset(test_idx))
    if return_hidden:
        return out + ((w[train_idx], w[test_idx]),)
    return out


def write_generated(config: GenConfig, out_dir: str | Path, stem: str) -> dict[str, Path]:
    """Write ``{stem}_train.csv``, ``{stem}_test.csv`` and ``{stem}.meta.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train, test, (w_train, w_test) = generate_synthetic(config, return_hidden=True)
    paths = {
        "train": out_dir / f"{stem}_train.csv",
        "test": out_dir / f"{stem}_test.csv",
        "meta": out_dir / f"{stem}.meta.json",
    }
    write_csv(train, paths["train"])
    write_csv(test, paths["test"])
    meta = {
        "generator": "hidden-confounder-toy",
        "config": asdict(config),
        "rng": RNG_NAME,
        "population_ate": population_ate(),
        "hidden_w": {"train": w_train.tolist(), "test": w_test.tolist()},
    }
    paths["meta"].write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
    return paths
