import json

import numpy as np
import pytest

from cxgboost import bench
from cxgboost.cli import main
from cxgboost.dataset import read_csv
from cxgboost.evalkit import MetricsTable


def _experiment(tmp_path, reps=3, split="test", models=("cxgboost", "slearner", "tlearner"), **extra):
    doc = {
        "seed": 0,
        "models": [{"name": m, "kind": m, "params": {"n_estimators": 5}} for m in models],
        "metrics": ["ate", "pehe"],
        "split": split,
        "collection": {"generator": {"replications": reps, "n_samples": 150, "n_covariates": 3}},
        "output_dir": str(tmp_path / "run"),
        **extra,
    }
    p = tmp_path / "exp.json"
    p.write_text(json.dumps(doc))
    return p


def test_benchmark_table_shapes_and_rerun_bytes(tmp_path, capsys):
    cfg = _experiment(tmp_path)
    assert main(["benchmark", "--config", str(cfg)]) == 0
    run = tmp_path / "run"
    files = sorted(p.name for p in run.glob("metrics_*.csv"))
    assert files == ["metrics_ate_test.csv", "metrics_pehe_test.csv"]
    table = MetricsTable.read_csv(run / "metrics_pehe_test.csv")
    assert table.values.shape == (3, 3)
    first = {f: (run / f).read_bytes() for f in files}
    assert main(["benchmark", "--config", str(cfg)]) == 0
    assert first == {f: (run / f).read_bytes() for f in files}
    report = json.loads((run / "run_report.json").read_text())
    assert report["failures"] == [] and len(report["records"]) == 9


def test_empty_model_list_rejected(tmp_path, capsys):
    cfg = _experiment(tmp_path, models=())
    assert main(["benchmark", "--config", str(cfg)]) == 2
    assert not (tmp_path / "run").exists()


def test_missing_config_is_io_error(tmp_path, capsys):
    assert main(["benchmark", "--config", str(tmp_path / "absent.json")]) == 4


def test_partial_failure_exit_code(tmp_path, capsys):
    data = tmp_path / "csvs"
    data.mkdir()
    (data / "nogt_train.csv").write_text("x0,t,y\n" + "".join(f"{i},{i % 2},{i % 3}\n" for i in range(20)))
    doc = {"models": [{"name": "c", "kind": "cxgboost"}], "split": "train",
           "collection": {"csv_dir": "csvs"}, "output_dir": str(tmp_path / "run")}
    (tmp_path / "exp.json").write_text(json.dumps(doc))
    assert main(["benchmark", "--config", str(tmp_path / "exp.json")]) == 3
    failures = json.loads((tmp_path / "run" / "failures.json").read_text())
    assert "ground truth" in failures[0]["error"]


def test_generate_distinct_and_reproducible(tmp_path, capsys):
    cfg = _experiment(tmp_path, reps=5)
    assert main(["generate", "--config", str(cfg)]) == 0
    data = tmp_path / "run" / "data"
    trains = sorted(data.glob("*_train.csv"))
    assert len(trains) == 5 and len(list(data.glob("*_test.csv"))) == 5
    blobs = [p.read_bytes() for p in trains]
    assert len(set(blobs)) == 5
    assert main(["generate", "--config", str(cfg)]) == 0
    assert blobs == [p.read_bytes() for p in trains]


def test_override_precedence(tmp_path, monkeypatch):
    cfg = bench.load_experiment(_experiment(tmp_path))
    monkeypatch.setenv(bench.ENV_OUT_DIR, "from-env")
    monkeypatch.setenv(bench.ENV_THREADS, "2")
    got = bench.apply_overrides(cfg)
    assert got.output_dir == "from-env" and got.threads == 2
    got = bench.apply_overrides(cfg, out_dir="from-cli", threads=1, seed=9)
    assert got.output_dir == "from-cli" and got.threads == 1
    assert got.generator.seeds == (10, 11, 12)


def test_profile_and_stats_commands(tmp_path, capsys):
    cfg = _experiment(tmp_path, reps=4)
    assert main(["benchmark", "--config", str(cfg)]) == 0
    run = tmp_path / "run"
    assert main(["profile", str(run), "--metric", "ate"]) == 0
    prof = json.loads((run / "profile_ate_test.json").read_text())
    assert len(prof["curves"]) == 3
    assert (run / "profile_ate_test.csv").read_text().startswith("model,tau,rho\n")
    capsys.readouterr()
    assert main(["stats", str(run / "metrics_pehe_test.csv"), "--alpha", "0.1"]) == 0
    assert "Friedman Aligned-Ranks" in capsys.readouterr().out
    far = json.loads((run / "far_pehe_test.json").read_text())
    assert far["alpha"] == 0.1 and far["degrees_of_freedom"] == 2


def test_stats_tie_table(tmp_path, capsys):
    p = tmp_path / "metrics_tie.csv"
    MetricsTable(["a", "b", "c"], ["m1", "m2"], np.ones((3, 2))).write_csv(p)
    assert main(["stats", str(p)]) == 0
    far = json.loads((tmp_path / "far_tie.json").read_text())
    assert far["statistic"] == 0.0 and far["p_value"] == 1.0
    assert not any(c["reject"] for c in far["comparisons"])


def test_train_and_predict(tmp_path, capsys):
    cfg = _experiment(tmp_path, reps=1)
    main(["generate", "--config", str(cfg)])
    train = next((tmp_path / "run" / "data").glob("*_train.csv"))
    model = tmp_path / "m.json"
    assert main(["train", str(train), "--kind", "cxgboost", "--hessian-mode", "exact", "--out", str(model)]) == 0
    out = tmp_path / "pred.csv"
    assert main(["predict", str(model), str(train), "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "q0,q1,ite" and len(rows) == read_csv(train).n_rows + 1


@pytest.mark.slow
def test_generate_full_scale(tmp_path, capsys):
    doc = {"models": [{"kind": "cxgboost"}],
           "collection": {"generator": {"replications": 1, "n_samples": 5000, "n_covariates": 1000}},
           "output_dir": str(tmp_path)}
    (tmp_path / "e.json").write_text(json.dumps(doc))
    assert main(["generate", "--config", str(tmp_path / "e.json")]) == 0
    ds = read_csv(next(tmp_path.glob("data/*_train.csv")))
    assert (ds.n_rows, ds.n_features) == (4000, 1000)
