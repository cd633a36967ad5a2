import csv
import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from conftest import tree_files
from ela_explain.pipeline import load_config
from ela_explain.pipeline.cli import main
from ela_explain.errors import ConfigError

TINY = {
    "suite": {"fids": [1, 21], "iids": [1, 2], "dim": 2},
    "sampling": {"n_per_dim": 50, "repetitions": 2},
    "performance": {"budget": 120, "runs": 1},
    "models": [
        {"family": "tree", "scenario": "STR", "target_selector": "precision"},
        {"family": "forest", "scenario": "MTR", "target_selector": "both", "hyperparameters": {"n_estimators": 3}},
        {"family": "mlp", "scenario": "STR", "target_selector": "log_precision",
         "hyperparameters": {"epochs": 2}},
    ],
    "explanation": {"local": [21, 1], "n_coalitions": 200, "top_k": 5},
}


def write_cfg(tmp_path, over=None, name="cfg.yaml"):
    d = json.loads(json.dumps(TINY))
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(d.get(k), dict):
            d[k].update(v)
        else:
            d[k] = v
    p = tmp_path / name
    p.write_text(yaml.safe_dump(d))
    return p


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("tiny")
    cfg = write_cfg(tmp)
    out = tmp / "out"
    assert main(["all", "--config", str(cfg), "--output-dir", str(out)]) == 0
    return cfg, out


def test_tiny_outputs_exist(tiny_run):
    _, out = tiny_run
    for rel in ("features/landscape.csv", "features/landscape_reps.csv", "features/flags.csv",
                "features/suite.csv", "features/designs/f1_i1_r0.csv", "performance/performance.csv",
                "train_eval/folds.csv", "train_eval/mae_report.json",
                "train_eval/models/tree-STR-target/fold_1.json", "explain/explain_report_fold0.json",
                "explain/local_f21_i1_fold0.csv", "represent/embedding_input.csv",
                "represent/represent_report.json", "config.yaml"):
        assert (out / rel).exists(), rel
    with open(out / "represent/embedding_input.csv") as fh:
        rows = list(csv.DictReader(fh))
    # tree + mlp give one row per fold, the MTR forest one per target per fold
    assert len(rows) == 2 * (1 + 1 + 2)


def test_idempotent_rerun_skips_and_keeps_bytes(tiny_run):
    cfg, out = tiny_run
    before = tree_files(out)
    assert main(["all", "--config", str(cfg), "--output-dir", str(out)]) == 0
    assert tree_files(out) == before
    man = json.loads((out / "manifests/train-eval.json").read_text())
    assert man["skipped"] is True


def test_manifest_contents(tiny_run):
    _, out = tiny_run
    man = json.loads((out / "manifests/features.json").read_text())
    assert set(man) >= {"command", "config_hash", "config", "inputs", "outputs", "versions", "timestamp"}
    assert man["config"]["seed"] == 0
    assert set(man["versions"]) >= {"numpy", "scipy", "python", "ela_explain"}
    import hashlib
    for rel, h in man["outputs"].items():
        assert hashlib.sha256((out / rel).read_bytes()).hexdigest() == h


def test_force_recomputes_identically(tiny_run, tmp_path):
    cfg, out = tiny_run
    explain = (out / "explain/tree-STR-target_fold0.csv").read_bytes()
    assert main(["explain", "--config", str(cfg), "--output-dir", str(out), "--force"]) == 0
    assert (out / "explain/tree-STR-target_fold0.csv").read_bytes() == explain


def test_explain_other_fold_and_local(tiny_run):
    cfg, out = tiny_run
    assert main(["explain", "--config", str(cfg), "--output-dir", str(out), "--fold", "1",
                 "--fid", "1", "--iid", "2"]) == 0
    rep = json.loads((out / "explain/explain_report_fold1.json").read_text())
    for entry in rep["models"].values():
        assert entry["efficiency_gap"] <= 1e-9 * 1e6
        assert entry["local"]["instance"] == [1, 2]


def test_unknown_fold_is_config_error(tiny_run, capsys):
    cfg, out = tiny_run
    assert main(["explain", "--config", str(cfg), "--output-dir", str(out), "--fold", "7"]) == 2
    assert "fold 7" in capsys.readouterr().err


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("suite: {fids: [1], iids: [1, 2], dim: 2}\nbogus: 1\n")
    assert main(["features", "--config", str(bad), "--output-dir", str(tmp_path / "o")]) == 2
    assert main(["features", "--config", str(tmp_path / "nope.yaml")]) == 2
    assert main(["features", "--jobs", "0"]) == 2
    with pytest.raises(ConfigError):
        load_config(write_cfg(tmp_path, {"suite": {"fids": [99], "iids": [1, 2], "dim": 2}}))
    with pytest.raises(ConfigError):
        load_config(write_cfg(tmp_path, {"suite": {"fids": [1], "iids": [2, 3], "dim": 2}}))


def test_train_eval_without_inputs_is_data_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["train-eval", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 3
    assert "run the features command first" in capsys.readouterr().err


def test_ingest_performance(tmp_path, tiny_run):
    _, out = tiny_run
    table = tmp_path / "perf.csv"
    rows = ["fid,iid,target", "1,1,0", "1,2,9", "21,1,99", "21,2,0.5"]
    table.write_text("\n".join(rows) + "\n")
    ext = {"performance": {"mode": "ingest", "path": str(table)},
           "features": {"path": str(out / "features/landscape.csv")}}
    cfg = write_cfg(tmp_path, ext)
    o = tmp_path / "o"
    assert main(["features", "--config", str(cfg), "--output-dir", str(o)]) == 0
    assert main(["performance", "--config", str(cfg), "--output-dir", str(o)]) == 0
    with open(o / "performance/performance.csv") as fh:
        got = {(int(r["fid"]), int(r["iid"])): float(r["log_target"]) for r in csv.DictReader(fh)}
    assert got[(1, 1)] == 0.0 and got[(1, 2)] == 1.0 and got[(21, 1)] == 2.0
    assert main(["train-eval", "--config", str(cfg), "--output-dir", str(o)]) == 0


def test_ingest_inconsistent_log_is_data_error(tmp_path, tiny_run, capsys):
    table = tmp_path / "perf.csv"
    table.write_text("fid,iid,target,log_target\n1,1,9,0.5\n1,2,0,0\n21,1,0,0\n21,2,0,0\n")
    cfg = write_cfg(tmp_path, {"performance": {"mode": "ingest", "path": str(table)}})
    assert main(["performance", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 3
    assert "inconsistent" in capsys.readouterr().err


def test_ingest_missing_instance_is_data_error(tmp_path):
    table = tmp_path / "perf.csv"
    table.write_text("fid,iid,target\n1,1,0\n")
    cfg = write_cfg(tmp_path, {"performance": {"mode": "ingest", "path": str(table)}})
    assert main(["performance", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 3


def test_ingested_features_with_gaps_fail_at_train_eval(tmp_path, tiny_run, capsys):
    _, out = tiny_run
    src = (out / "features/landscape.csv").read_text().splitlines()
    header = src[0].split(",")
    row = src[1].split(",")
    row[header.index("ela_distr.skewness")] = "NA"
    (tmp_path / "l.csv").write_text("\n".join([src[0], ",".join(row)] + src[2:]) + "\n")
    perf = out / "performance/performance.csv"
    cfg = write_cfg(tmp_path, {"features": {"path": str(tmp_path / "l.csv")},
                               "performance": {"mode": "ingest", "path": str(perf)}})
    o = tmp_path / "o"
    assert main(["features", "--config", str(cfg), "--output-dir", str(o)]) == 0
    assert main(["performance", "--config", str(cfg), "--output-dir", str(o)]) == 0
    assert main(["train-eval", "--config", str(cfg), "--output-dir", str(o)]) == 3
    assert "ela_distr.skewness" in capsys.readouterr().err


def test_trace_files(tmp_path):
    cfg = write_cfg(tmp_path)
    o = tmp_path / "o"
    assert main(["performance", "--config", str(cfg), "--output-dir", str(o), "--trace"]) == 0
    lines = (o / "performance/traces/f1_i1.jsonl").read_text().splitlines()
    first = json.loads(lines[0])
    assert {"run", "generation", "evals", "best_precision"} <= set(first)


def test_parallel_jobs_match_serial(tmp_path, tiny_run):
    cfg, out = tiny_run
    o = tmp_path / "par"
    assert main(["features", "--config", str(cfg), "--output-dir", str(o), "--jobs", "2"]) == 0
    assert (o / "features/landscape.csv").read_bytes() == (out / "features/landscape.csv").read_bytes()
