"""Experiment runner: datasets x estimators -> metric tables and a run report."""

from __future__ import annotations

import json
import logging
import os
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._numba_setup import set_threads
from .causal import ESTIMATORS, HessianMode, fit_estimator, save_model
from .dataset import Dataset, read_csv
from .evalkit import METRICS, MetricsTable
from .gbt import TrainConfig
from .synthetic import GenConfig, write_generated

logger = logging.getLogger(__name__)

ENV_OUT_DIR = "CXGBOOST_OUT_DIR"
ENV_THREADS = "CXGBOOST_THREADS"
SPLITS = ("train", "test")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    name: str
    kind: str
    params: TrainConfig = field(default_factory=TrainConfig)
    hessian_mode: HessianMode = HessianMode.PAPER_LITERAL


@dataclass(frozen=True)
class GeneratorCollection:
    replications: int
    base: GenConfig
    seeds: tuple[int, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple[ModelSpec, ...]
    metrics: tuple[str, ...] = ("ate", "pehe")
    split: str = "both"
    output_dir: str = "runs/default"
    seed: int = 0
    threads: int | None = None
    generator: GeneratorCollection | None = None
    csv_dir: str | None = None

    @property
    def splits(self) -> tuple[str, ...]:
        return SPLITS if self.split == "both" else (self.split,)


def parse_experiment(doc: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Validate a JSON experiment document. Raises :class:`ConfigError`."""
    try:
        seed = int(doc.get("seed", 0))
        models = []
        for m in doc.get("models") or []:
            kind = m["kind"]
            if kind not in ESTIMATORS:
                raise ConfigError(f"unknown estimator kind {kind!r}")
            params = dict(m.get("params", {}))
            params.setdefault("seed", seed)
            models.append(ModelSpec(
                name=str(m.get("name", kind)),
                kind=kind,
                params=TrainConfig.from_dict(params),
                hessian_mode=HessianMode(m.get("hessian_mode", HessianMode.PAPER_LITERAL.value)),
            ))
        if not models:
            raise ConfigError("experiment lists no models")
        if len({m.name for m in models}) != len(models):
            raise ConfigError("model names must be unique")

        metrics = tuple(doc.get("metrics", ("ate", "pehe")))
        if not metrics or any(mt not in METRICS for mt in metrics):
            raise ConfigError(f"metrics must be a nonempty subset of {sorted(METRICS)}")
        split = doc.get("split", "both")
        if split not in ("train", "test", "both"):
            raise ConfigError("split must be one of train, test, both")

        coll = doc.get("collection") or {}
        generator = csv_dir = None
        if "generator" in coll:
            g = dict(coll["generator"])
            reps = int(g.pop("replications", 1))
            seeds = tuple(int(s) for s in g.pop("seeds", range(seed + 1, seed + 1 + reps)))
            if len(seeds) != reps or reps < 1:
                raise ConfigError("need at least one replication and one seed per replication")
            base = GenConfig(**{**g, "seed": 0})
            generator = GeneratorCollection(reps, base, seeds)
        elif "csv_dir" in coll:
            csv_dir = str(coll["csv_dir"])
            if base_dir is not None and not Path(csv_dir).is_absolute():
                csv_dir = str(base_dir / csv_dir)
        else:
            raise ConfigError("collection needs either 'generator' or 'csv_dir'")

        threads = doc.get("threads")
        return ExperimentConfig(
            models=tuple(models),
            metrics=metrics,
            split=split,
            output_dir=str(doc.get("output_dir", "runs/default")),
            seed=seed,
            threads=int(threads) if threads is not None else None,
            generator=generator,
            csv_dir=csv_dir,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid experiment config: {exc}") from exc


def load_experiment(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_experiment(doc, base_dir=path.parent)


def apply_overrides(cfg: ExperimentConfig, out_dir=None, threads=None, seed=None) -> ExperimentConfig:
    """CLI flags beat environment variables, which beat the config file."""
    changes = {}
    out_dir = out_dir or os.environ.get(ENV_OUT_DIR)
    if out_dir:
        changes["output_dir"] = str(out_dir)
    threads = threads or os.environ.get(ENV_THREADS)
    if threads:
        changes["threads"] = int(threads)
    if seed is not None and seed != cfg.seed:
        changes["seed"] = seed
        if cfg.generator is not None:
            g = cfg.generator
            changes["generator"] = GeneratorCollection(
                g.replications, g.base, tuple(range(seed + 1, seed + 1 + g.replications))
            )
    if not changes:
        return cfg
    d = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    d.update(changes)
    return ExperimentConfig(**d)


def generate_collection(cfg: ExperimentConfig, data_dir: Path) -> list[str]:
    """Write every replication of the generator collection; returns dataset ids."""
    if cfg.generator is None:
        raise ConfigError("experiment has no generator collection")
    ids = []
    for seed in cfg.generator.seeds:
        gen = GenConfig(**{**asdict(cfg.generator.base), "seed": seed})
        stem = f"synthetic_s{seed:04d}"
        write_generated(gen, data_dir, stem)
        ids.append(stem)
    return ids


def _discover_csv(csv_dir: Path) -> dict[str, dict[str, Path]]:
    found: dict[str, dict[str, Path]] = {}
    for p in sorted(csv_dir.glob("*.csv")):
        stem = p.stem
        for split in SPLITS:
            if stem.endswith(f"_{split}"):
                found.setdefault(stem[: -len(split) - 1], {})[split] = p
                break
        else:
            found.setdefault(stem, {})["train"] = p
    return found


@dataclass
class CellResult:
    dataset: str
    model: str
    split: str
    metrics: dict[str, float] = field(default_factory=dict)
    fit_seconds: float | None = None
    predict_seconds: float | None = None
    model_path: str | None = None
    error: str | None = None


@dataclass
class RunOutcome:
    report: dict
    tables: dict[tuple[str, str], MetricsTable]
    failures: list[dict]

    @property
    def exit_code(self) -> int:
        return 3 if self.failures else 0


def run_benchmark(cfg: ExperimentConfig) -> RunOutcome:
    out = Path(cfg.output_dir)
    data_dir, model_dir = out / "data", out / "models"
    data_dir.mkdir(parents=True, exist_ok=True)
    model_dir.mkdir(parents=True, exist_ok=True)
    threads = set_threads(cfg.threads)

    if cfg.generator is not None:
        ids = generate_collection(cfg, data_dir)
        files = {i: {s: data_dir / f"{i}_{s}.csv" for s in SPLITS} for i in ids}
    else:
        files = _discover_csv(Path(cfg.csv_dir))
        if not files:
            raise ConfigError(f"no CSV datasets found in {cfg.csv_dir}")

    cells: list[CellResult] = []
    failures: list[dict] = []

    for ds_id, paths in files.items():
        loaded: dict[str, Dataset] = {}
        for split, p in paths.items():
            try:
                loaded[split] = read_csv(p)
            except (OSError, ValueError) as exc:
                failures.append({"dataset": ds_id, "model": None, "split": split,
                                 "error": f"load failed: {exc}"})
        for spec in cfg.models:
            cell_cells = [CellResult(ds_id, spec.name, s) for s in cfg.splits]
            cells += cell_cells
            train = loaded.get("train")
            if train is None:
                _fail(cell_cells, failures, "no training split")
                continue
            try:
                t0 = time.perf_counter()
                model = fit_estimator(spec.kind, train, spec.params, spec.hessian_mode)
                fit_s = time.perf_counter() - t0
                mpath = model_dir / f"{ds_id}__{_slug(spec.name)}.json"
                save_model(model, mpath)
            except Exception as exc:  # one bad cell must not sink the run
                logger.exception("fit failed for %s / %s", ds_id, spec.name)
                _fail(cell_cells, failures, f"fit failed: {type(exc).__name__}: {exc}")
                continue
            for cell in cell_cells:
                cell.fit_seconds, cell.model_path = fit_s, str(mpath)
                data = loaded.get(cell.split)
                if data is None:
                    _fail([cell], failures, f"no {cell.split} split available")
                    continue
                try:
                    t0 = time.perf_counter()
                    q0, q1 = model.predict_potential(data.features)
                    cell.predict_seconds = time.perf_counter() - t0
                    if not data.has_ground_truth:
                        raise ValueError("dataset has no mu0/mu1 ground truth")
                    for m in cfg.metrics:
                        cell.metrics[m] = METRICS[m](data.mu0, data.mu1, q0, q1)
                except Exception as exc:
                    _fail([cell], failures, f"{type(exc).__name__}: {exc}")

    tables = _assemble_tables(cfg, list(files), cells, failures)
    for (metric, split), table in tables.items():
        table.write_csv(out / f"metrics_{metric}_{split}.csv")

    report = {
        "version": __version__,
        "environment": {
            "seed": cfg.seed,
            "threads": threads,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "config": _config_doc(cfg),
        "records": [asdict(c) for c in cells],
        "tables": {f"{m}/{s}": f"metrics_{m}_{s}.csv" for (m, s) in tables},
        "failures": failures,
    }
    (out / "run_report.json").write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    if failures:
        (out / "failures.json").write_text(json.dumps(failures, indent=1) + "\n", encoding="utf-8")
    return RunOutcome(report, tables, failures)


def _fail(cells, failures, message):
    for c in cells:
        c.error = message
        failures.append({"dataset": c.dataset, "model": c.model, "split": c.split, "error": message})


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def _assemble_tables(cfg, dataset_ids, cells, failures):
    by_key = {(c.dataset, c.model, c.split): c for c in cells}
    model_ids = [m.name for m in cfg.models]
    tables = {}
    for split in cfg.splits:
        for metric in cfg.metrics:
            rows, keep = [], []
            for ds in dataset_ids:
                vals = [by_key[(ds, m, split)].metrics.get(metric) for m in model_ids]
                if any(v is None for v in vals):
                    continue
                rows.append(vals)
                keep.append(ds)
            if len(keep) < len(dataset_ids):
                logger.warning("%s/%s: %d dataset(s) dropped for incomplete rows",
                               metric, split, len(dataset_ids) - len(keep))
            if keep:
                tables[(metric, split)] = MetricsTable(keep, model_ids, np.array(rows))
    return tables


def _config_doc(cfg: ExperimentConfig) -> dict:
    doc = {
        "models": [
            {"name": m.name, "kind": m.kind, "hessian_mode": m.hessian_mode.value,
             "params": m.params.to_dict()}
            for m in cfg.models
        ],
        "metrics": list(cfg.metrics),
        "split": cfg.split,
        "seed": cfg.seed,
    }
    if cfg.generator is not None:
        doc["collection"] = {"generator": {**asdict(cfg.generator.base),
                                           "replications": cfg.generator.replications,
                                           "seeds": list(cfg.generator.seeds)}}
        del doc["collection"]["generator"]["seed"]
    else:
        doc["collection"] = {"csv_dir": cfg.csv_dir}
    return doc
