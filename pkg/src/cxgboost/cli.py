"""Command-line entry point: ``cxgboost <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 partial failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import bench
from ._numba_setup import set_threads
from .causal import ESTIMATORS, HessianMode, fit_estimator, load_model, save_model
from .dataset import DatasetFormatError, read_csv
from .evalkit import (
    MetricsTable,
    far_test,
    finner_posthoc,
    format_far_table,
    performance_profile,
    profiles_to_long_csv,
)
from .gbt import TrainConfig

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("cxgboost")


def _experiment(args) -> bench.ExperimentConfig:
    if args.config:
        cfg = bench.load_experiment(args.config)
    else:
        text = resources.files("cxgboost").joinpath("data/default_experiment.json").read_text()
        cfg = bench.parse_experiment(json.loads(text))
    return bench.apply_overrides(cfg, out_dir=args.out, threads=args.threads, seed=args.seed)


def cmd_generate(args) -> int:
    cfg = _experiment(args)
    data_dir = Path(cfg.output_dir) / "data"
    ids = bench.generate_collection(cfg, data_dir)
    print(f"wrote {len(ids)} dataset(s) to {data_dir}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _experiment(args)
    outcome = bench.run_benchmark(cfg)
    for (metric, split), table in outcome.tables.items():
        med = np.median(table.values, axis=0)
        summary = ", ".join(f"{m}={v:.4g}" for m, v in zip(table.model_ids, med))
        print(f"{metric}/{split} median: {summary}")
    if outcome.failures:
        print(f"{len(outcome.failures)} cell(s) failed; see {Path(cfg.output_dir) / 'failures.json'}",
              file=sys.stderr)
    return outcome.exit_code


def _metrics_path(path: Path, metric: str, split: str) -> Path:
    return path / f"metrics_{metric}_{split}.csv" if path.is_dir() else path


def cmd_profile(args) -> int:
    src = _metrics_path(Path(args.metrics), args.metric, args.split)
    table = MetricsTable.read_csv(src)
    curves = performance_profile(table, epsilon=args.epsilon)
    out = Path(args.out) if args.out else src.parent
    out.mkdir(parents=True, exist_ok=True)
    stem = src.stem.replace("metrics_", "profile_", 1)
    doc = {"source": src.name, "epsilon": args.epsilon, "curves": [c.to_dict() for c in curves]}
    (out / f"{stem}.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    (out / f"{stem}.csv").write_text(profiles_to_long_csv(curves), encoding="utf-8")
    for c in curves:
        print(f"{c.model:<20} rho(0) = {c.at(0.0):.3f}")
    return EXIT_OK


def cmd_stats(args) -> int:
    src = _metrics_path(Path(args.metrics), args.metric, args.split)
    table = MetricsTable.read_csv(src)
    report = finner_posthoc(far_test(table), alpha=args.alpha)
    print(format_far_table(report))
    out = Path(args.out) if args.out else src.parent
    out.mkdir(parents=True, exist_ok=True)
    dest = out / f"{src.stem.replace('metrics_', 'far_', 1)}.json"
    dest.write_text(json.dumps(report.to_dict(), indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_train(args) -> int:
    set_threads(args.threads)
    params = {}
    if args.config:
        params = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        params["seed"] = args.seed
    config = TrainConfig.from_dict(params)
    data = read_csv(args.data)
    model = fit_estimator(args.kind, data, config, args.hessian_mode)
    out = Path(args.out or "model.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    print(f"saved {args.kind} model to {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    set_threads(args.threads)
    model = load_model(args.model)
    data = read_csv(args.data)
    q0, q1 = model.predict_potential(data.features)
    lines = ["q0,q1,ite"] + [
        f"{format(a, '.17g')},{format(b, '.17g')},{format(b - a, '.17g')}" for a, b in zip(q0, q1)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cxgboost", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_help="experiment config (JSON); defaults to the bundled experiment"):
        sp.add_argument("--config", help=config_help)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("generate", help="write seeded synthetic datasets")
    common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("benchmark", help="fit every model on every dataset and score it")
    common(sp)
    sp.set_defaults(func=cmd_benchmark)

    for name, func, extra in (("profile", cmd_profile, "profile"), ("stats", cmd_stats, "stats")):
        sp = sub.add_parser(name, help=f"{extra} from a metrics table CSV or run directory")
        sp.add_argument("metrics", help="metrics CSV, or a benchmark output directory")
        sp.add_argument("--metric", choices=("ate", "pehe"), default="pehe")
        sp.add_argument("--split", choices=bench.SPLITS, default="test")
        sp.add_argument("--out", help="output directory (default: next to the input)")
        sp.set_defaults(func=func)
    sub.choices["profile"].add_argument("--epsilon", type=float, default=1e-12)
    sub.choices["stats"].add_argument("--alpha", type=float, default=0.05)

    sp = sub.add_parser("train", help="fit one estimator on a dataset CSV")
    sp.add_argument("data")
    sp.add_argument("--kind", choices=sorted(ESTIMATORS), default="cxgboost")
    sp.add_argument("--hessian-mode", choices=[m.value for m in HessianMode],
                    default=HessianMode.PAPER_LITERAL.value)
    common(sp, config_help="TrainConfig fields as JSON")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="write q0, q1 and ite for a dataset CSV")
    sp.add_argument("model")
    sp.add_argument("data")
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", help="output CSV (default: stdout)")
    sp.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (bench.ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetFormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
