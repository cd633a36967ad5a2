"""Pipeline commands.  Each one reads and writes flat CSV/JSON files under the
run's output directory and records a manifest."""
from __future__ import annotations

import csv
import hashlib
import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..analysis import (average_representations, export_embedding_input, global_importance,
                        hierarchical_cluster, mae_table, model_representations, top_k_intersection,
                        validate_report, write_json)
from ..cv import build_fold_plan, run_cv, write_fold_plan_csv
from ..errors import ConfigError, DataError, NumericFailure
from ..landscape import (FeatureConfig, compute_features, read_landscape_csv, write_flags_csv,
                         write_landscape_csv)
from ..landscape.records import aggregate_repetitions
from ..models import load_model, save_model
from ..performance import (collect_performance, ingest_performance_csv, run_seed, write_performance_csv,
                           write_trace_jsonl)
from ..problems import ProblemInstance, make_problem, write_suite_manifest
from ..sampling import build_design, write_design_csv
from ..shap import explain_dataset, select_background, write_explanation_csv, write_prediction_csv
from .config import RunConfig, dump_config

log = logging.getLogger(__name__)

TARGET_COLUMNS = {"precision": 0, "log_precision": 1}
EFFICIENCY_TOL = 1e-9


@dataclass
class Context:
    cfg: RunConfig
    force: bool = False
    jobs: int = 1
    trace: bool = False

    @property
    def out(self) -> Path:
        return Path(self.cfg.output_dir)

    def path(self, *parts) -> Path:
        p = self.out.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def instances(self) -> list[ProblemInstance]:
        s = self.cfg.suite
        return [ProblemInstance(f, i, s.dim) for f in s.fids for i in s.iids]


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(ctx: Context, command: str, inputs, outputs, skipped=False) -> None:
    def rel(p):
        # outputs are keyed relative to the run directory, external inputs by absolute path
        p = Path(p)
        try:
            return str(p.relative_to(ctx.out))
        except ValueError:
            return str(p.resolve())

    doc = {
        "command": command,
        "config_hash": ctx.cfg.hash(),
        "config": ctx.cfg.to_dict(),
        "inputs": {rel(p): sha256(p) for p in inputs if Path(p).exists()},
        "outputs": {rel(p): sha256(p) for p in outputs if Path(p).exists()},
        "skipped": skipped,
        "versions": {"ela_explain": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    write_json(ctx.path("manifests", f"{command}.json"), doc)


def _fresh(ctx: Context, outputs) -> bool:
    """True when every output exists and recomputation was not forced."""
    return not ctx.force and all(Path(p).exists() for p in outputs)


# ----------------------------------------------------------------- features

def sampling_seed(global_seed: int, sampling_seed_: int, fid: int, iid: int) -> int:
    return int(np.random.SeedSequence([global_seed, sampling_seed_, fid, iid]).generate_state(1)[0])


def _instance_features(job):
    fid, iid, dim, n, reps, seed, n_cand, groups, curv_points = job
    ev = make_problem(fid, iid, dim)
    samples = build_design(ev, n, reps, seed, n_cand)
    fc = FeatureConfig(groups=tuple(groups), curv_points=curv_points)
    return samples, [compute_features(s, ev, fc) for s in samples]


def _map(ctx: Context, fn, jobs):
    if ctx.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(ctx.jobs) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def feature_paths(ctx: Context):
    return (ctx.path("features", "landscape.csv"), ctx.path("features", "landscape_reps.csv"),
            ctx.path("features", "flags.csv"), ctx.path("features", "suite.csv"))


def _ingest_features(ctx: Context, outputs):
    src = ctx.cfg.features.path
    got = {r.instance.key: r for r in read_landscape_csv(src)}
    insts = ctx.instances()
    missing = [i.key for i in insts if i.key not in got]
    if missing:
        raise DataError(f"{src}: no landscape rows for " + ", ".join(map(str, missing)))
    write_landscape_csv(outputs[0], [(i, None, got[i.key].values) for i in insts], per_repetition=False)
    write_suite_manifest(outputs[3], insts)
    write_manifest(ctx, "features", [Path(src)], [outputs[0], outputs[3]])
    return [outputs[0], outputs[3]]


def cmd_features(ctx: Context) -> list[Path]:
    cfg = ctx.cfg
    outputs = list(feature_paths(ctx))
    if cfg.features.path:
        if _fresh(ctx, [outputs[0], outputs[3]]):
            write_manifest(ctx, "features", [Path(cfg.features.path)], [outputs[0], outputs[3]], skipped=True)
            return [outputs[0], outputs[3]]
        return _ingest_features(ctx, outputs)
    if _fresh(ctx, outputs):
        log.info("features: outputs exist, skipping (use --force)")
        write_manifest(ctx, "features", [], outputs, skipped=True)
        return outputs
    insts = ctx.instances()
    s = cfg.sampling
    jobs = [(i.fid, i.iid, i.dim, cfg.n_samples, s.repetitions, sampling_seed(cfg.seed, s.seed, i.fid, i.iid),
             s.n_candidates, cfg.features.groups, cfg.features.curv_points) for i in insts]
    log.info("features: %d instances x %d repetitions, %d samples each", len(insts), s.repetitions, cfg.n_samples)
    results = _map(ctx, _instance_features, jobs)
    per_rep, agg, flags = [], [], []
    for inst, (samples, maps) in zip(insts, results):
        for r, (sample, fm) in enumerate(zip(samples, maps)):
            per_rep.append((inst, r, fm))
            flags.append((inst, r, fm.flags))
            write_design_csv(ctx.path("features", "designs", f"f{inst.fid}_i{inst.iid}_r{r}.csv"), sample)
        agg.append((inst, None, aggregate_repetitions(maps)))
    write_landscape_csv(outputs[0], agg, per_repetition=False)
    write_landscape_csv(outputs[1], per_rep, per_repetition=True)
    write_flags_csv(outputs[2], flags)
    write_suite_manifest(outputs[3], insts)
    write_manifest(ctx, "features", [], outputs)
    return outputs


# -------------------------------------------------------------- performance

def _instance_performance(job):
    fid, iid, dim, runs, budget, base_seed, trace = job
    ev = make_problem(fid, iid, dim)
    traces = [] if trace else None
    rec = collect_performance(ev, runs, budget, base_seed, traces)
    return rec, traces


def cmd_performance(ctx: Context) -> list[Path]:
    cfg = ctx.cfg
    p = cfg.performance
    out = ctx.path("performance", "performance.csv")
    outputs = [out]
    inputs = [Path(p.path)] if p.mode == "ingest" else []
    if _fresh(ctx, outputs):
        log.info("performance: outputs exist, skipping (use --force)")
        write_manifest(ctx, "performance", inputs, outputs, skipped=True)
        return outputs
    insts = ctx.instances()
    if p.mode == "ingest":
        got = {r.instance.key: r for r in ingest_performance_csv(p.path, cfg.suite.dim)}
        missing = [i.key for i in insts if i.key not in got]
        if missing:
            raise DataError(f"{p.path}: no performance rows for " + ", ".join(map(str, missing)))
        records = [got[i.key] for i in insts]
    else:
        jobs = [(i.fid, i.iid, i.dim, p.runs, p.budget, run_seed(i.fid, i.iid) + cfg.seed * 10**8, ctx.trace)
                for i in insts]
        log.info("performance: %d instances x %d runs, budget %s", len(insts), p.runs, p.budget)
        results = _map(ctx, _instance_performance, jobs)
        records = [r for r, _ in results]
        if ctx.trace:
            for inst, (_, traces) in zip(insts, results):
                tp = ctx.path("performance", "traces", f"f{inst.fid}_i{inst.iid}.jsonl")
                write_trace_jsonl(tp, traces)
                outputs.append(tp)
    write_performance_csv(out, records)
    write_manifest(ctx, "performance", inputs, outputs)
    return outputs


# --------------------------------------------------------------- train-eval

@dataclass
class Dataset:
    keys: list[tuple[int, int]]
    feature_names: list[str]
    X: np.ndarray
    Y: np.ndarray           # columns: precision, log_precision

    def targets(self, spec) -> np.ndarray:
        return self.Y[:, [TARGET_COLUMNS[t] for t in spec.targets]]

    def truth(self, spec) -> dict:
        Ys = self.targets(spec)
        return {k: Ys[i] for i, k in enumerate(self.keys)}

    def rows(self, keys) -> np.ndarray:
        pos = {k: i for i, k in enumerate(self.keys)}
        return self.X[[pos[k] for k in keys]]


def load_dataset(ctx: Context) -> Dataset:
    lpath = feature_paths(ctx)[0]
    ppath = ctx.path("performance", "performance.csv")
    for p, cmd in ((lpath, "features"), (ppath, "performance")):
        if not p.exists():
            raise DataError(f"{p} not found; run the {cmd} command first")
    feats = {r.instance.key: r for r in read_landscape_csv(lpath)}
    perf = {r.instance.key: r for r in ingest_performance_csv(ppath, ctx.cfg.suite.dim)}
    keys = [i.key for i in ctx.instances()]
    missing = [k for k in keys if k not in feats or k not in perf]
    if missing:
        raise DataError("instances without features or performance: " + ", ".join(map(str, missing)))
    names = feats[keys[0]].names
    X = np.array([[feats[k].values[n] for n in names] for k in keys])
    if np.isnan(X).any():
        i, j = np.argwhere(np.isnan(X))[0]
        raise DataError(f"{lpath}: missing value for feature {names[j]!r} of instance {keys[i]}")
    Y = np.array([[perf[k].target, perf[k].log_target] for k in keys])
    return Dataset(keys, names, X, Y)


def model_path(ctx: Context, model_id: str, fold: int) -> Path:
    return ctx.path("train_eval", "models", model_id, f"fold_{fold}.json")


def cmd_train_eval(ctx: Context) -> list[Path]:
    cfg = ctx.cfg
    report_path = ctx.path("train_eval", "mae_report.json")
    plan_path = ctx.path("train_eval", "folds.csv")
    n_folds = len(cfg.suite.iids)
    outputs = [report_path, plan_path]
    outputs += [ctx.path("train_eval", "predictions", f"{m.model_id}.csv") for m in cfg.models]
    outputs += [model_path(ctx, m.model_id, k) for m in cfg.models for k in range(n_folds)]
    inputs = [feature_paths(ctx)[0], ctx.path("performance", "performance.csv")]
    if _fresh(ctx, outputs):
        log.info("train-eval: outputs exist, skipping (use --force)")
        write_manifest(ctx, "train-eval", inputs, outputs, skipped=True)
        return outputs
    data = load_dataset(ctx)
    plan = build_fold_plan(data.keys, n_folds)
    write_fold_plan_csv(plan_path, plan)
    report = {"config": cfg.content(), "feature_names": data.feature_names, "n_folds": n_folds,
              "mae": {}, "summary": {}}
    for spec in cfg.models:
        log.info("train-eval: %s", spec.model_id)
        res = run_cv(data.keys, data.X, data.targets(spec), spec, plan, cfg.seed, ctx.jobs)
        for k, m in enumerate(res.models):
            save_model(model_path(ctx, spec.model_id, k), m, model_id=spec.model_id, fold=k,
                       spec=spec.to_dict(), feature_names=data.feature_names)
        with open(ctx.path("train_eval", "predictions", f"{spec.model_id}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fid", "iid", "fold"] + list(spec.targets))
            for key in data.keys:
                w.writerow([key[0], key[1], plan.assignment[key]] + [repr(float(v)) for v in res.predictions[key]])
        table = mae_table(res.predictions, data.truth(spec), data.keys, spec.targets)
        report["mae"][spec.model_id] = table.to_dict()
        report["summary"][spec.model_id] = {t: float(v) for t, v in zip(spec.targets, table.mean)}
    validate_report(report)
    write_json(report_path, report)
    write_manifest(ctx, "train-eval", inputs, outputs)
    return outputs


# ------------------------------------------------------------------ explain

def _load_fold_model(ctx: Context, spec, fold: int):
    p = model_path(ctx, spec.model_id, fold)
    if not p.exists():
        raise DataError(f"{p} not found; run train-eval first")
    return load_model(p)


def explain_fold(ctx: Context, data: Dataset, spec, fold: int, plan):
    """Explanation of the fold model on its training partition."""
    model = _load_fold_model(ctx, spec, fold)
    keys = plan.train_keys(fold)
    Xtr = data.rows(keys)
    bg = select_background(Xtr, ctx.cfg.explanation.background, ctx.cfg.seed + fold)
    e = explain_dataset(model, Xtr, background=bg, feature_names=data.feature_names,
                        model_id=spec.model_id, dataset_id=f"fold{fold}-train",
                        instance_ids=[f"f{f}_i{i}" for f, i in keys], target_names=spec.targets,
                        n_coalitions=ctx.cfg.explanation.n_coalitions, seed=ctx.cfg.seed + fold)
    gap = e.efficiency_gap()
    if gap > EFFICIENCY_TOL * max(1.0, float(np.abs(e.prediction).max())):
        raise NumericFailure(f"{spec.model_id} fold {fold}: efficiency violated by {gap:.3g}")
    return model, bg, e


def cmd_explain(ctx: Context, fold: int | None = None, local: tuple[int, int] | None = None) -> list[Path]:
    cfg = ctx.cfg
    fold = cfg.explanation.fold if fold is None else fold
    n_folds = len(cfg.suite.iids)
    if not 0 <= fold < n_folds:
        raise ConfigError(f"fold {fold} outside 0..{n_folds - 1}")
    local = tuple(cfg.explanation.local) if local is None and cfg.explanation.local else local
    if local is not None and tuple(local) not in {i.key for i in ctx.instances()}:
        raise ConfigError(f"local instance {local} is not part of the suite")
    report_path = ctx.path("explain", f"explain_report_fold{fold}.json")
    outputs = [report_path]
    for m in cfg.models:
        outputs += [ctx.path("explain", f"{m.model_id}_fold{fold}.csv"),
                    ctx.path("explain", f"{m.model_id}_fold{fold}_predictions.csv")]
    if local is not None:
        outputs.append(ctx.path("explain", f"local_f{local[0]}_i{local[1]}_fold{fold}.csv"))
    inputs = [model_path(ctx, m.model_id, fold) for m in cfg.models]
    if _fresh(ctx, outputs):
        log.info("explain: outputs exist, skipping (use --force)")
        write_manifest(ctx, "explain", inputs, outputs, skipped=True)
        return outputs
    data = load_dataset(ctx)
    plan = build_fold_plan(data.keys, n_folds)
    report = {"config": cfg.content(), "fold": fold, "models": {}}
    local_rows = []
    for spec in cfg.models:
        log.info("explain: %s fold %d", spec.model_id, fold)
        model, bg, e = explain_fold(ctx, data, spec, fold, plan)
        write_explanation_csv(ctx.path("explain", f"{spec.model_id}_fold{fold}.csv"), e)
        write_prediction_csv(ctx.path("explain", f"{spec.model_id}_fold{fold}_predictions.csv"), e)
        entry = {"base_value": e.base_value.tolist(), "efficiency_gap": e.efficiency_gap(),
                 "flags": sorted(e.flags), "top_k": {}}
        for t, tname in enumerate(spec.targets):
            entry["top_k"][tname] = [[n, v] for n, v in global_importance(e, cfg.explanation.top_k, t)]
        if local is not None:
            x = data.rows([tuple(local)])
            le = explain_dataset(model, x, background=bg, feature_names=data.feature_names,
                                 model_id=spec.model_id, instance_ids=[f"f{local[0]}_i{local[1]}"],
                                 target_names=spec.targets, n_coalitions=cfg.explanation.n_coalitions,
                                 seed=cfg.seed + fold)
            entry["local"] = {"instance": list(local), "prediction": le.prediction[0].tolist(),
                              "base_value": le.base_value.tolist(),
                              "efficiency_gap": le.efficiency_gap()}
            for f, name in enumerate(le.feature_names):
                for t, tname in enumerate(spec.targets):
                    local_rows.append([spec.model_id, le.instance_ids[0], name, tname, repr(float(x[0, f])),
                                       repr(float(le.shap[0, f, t])), repr(float(le.base_value[t])),
                                       repr(float(le.prediction[0, t]))])
        report["models"][spec.model_id] = entry
    if local is not None:
        with open(outputs[-1], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model_id", "instance_id", "feature", "target", "feature_value", "shap_value",
                        "base_value", "prediction"])
            w.writerows(local_rows)
    write_json(report_path, report)
    write_manifest(ctx, "explain", inputs, outputs)
    return outputs


# ---------------------------------------------------------------- represent

def cmd_represent(ctx: Context) -> list[Path]:
    cfg = ctx.cfg
    n_folds = len(cfg.suite.iids)
    emb = ctx.path("represent", "embedding_input.csv")
    emb_abs = ctx.path("represent", "embedding_input_abs.csv")
    report_path = ctx.path("represent", "represent_report.json")
    outputs = [emb, emb_abs, report_path]
    inputs = [model_path(ctx, m.model_id, k) for m in cfg.models for k in range(n_folds)]
    if _fresh(ctx, outputs):
        log.info("represent: outputs exist, skipping (use --force)")
        write_manifest(ctx, "represent", inputs, outputs, skipped=True)
        return outputs
    data = load_dataset(ctx)
    plan = build_fold_plan(data.keys, n_folds)
    reps = []
    for spec in cfg.models:
        for k in range(n_folds):
            log.info("represent: %s fold %d", spec.model_id, k)
            _, _, e = explain_fold(ctx, data, spec, k, plan)
            reps += model_representations(e, spec.family, spec.scenario, k)
    export_embedding_input(emb, reps)
    export_embedding_input(emb_abs, reps, absolute=True)

    report = {"config": cfg.content(), "n_representations": len(reps), "clusters": {}, "top_k": {}, "venn": {}}
    by_config: dict[str, list] = {}
    for r in reps:
        by_config.setdefault(r.key, []).append(r)
    for key, group in by_config.items():
        if len(group) >= 2:
            c = hierarchical_cluster(group)
            report["clusters"][key] = {"folds": [r.fold for r in group], "leaf_order": c.leaf_order,
                                       "partition": c.partition, "merge_heights": c.linkage[:, 2].tolist()}
    by_group: dict[str, dict] = {}
    for key, group in by_config.items():
        r0 = group[0]
        by_group.setdefault(f"{r0.scenario}-{r0.target}", {})[r0.family] = average_representations(group)
    k = min(cfg.explanation.top_k, len(data.feature_names))
    for gname, fams in by_group.items():
        inter = top_k_intersection(fams, k)
        for fam, feats in inter.sets.items():
            report["top_k"][f"{fam}-{gname}"] = feats
        report["venn"][gname] = {"&".join(combo): feats for combo, feats in inter.regions.items()}
        report["venn"][gname]["__common__"] = inter.common()
    write_json(report_path, report)
    write_manifest(ctx, "represent", inputs, outputs)
    return outputs


def cmd_all(ctx: Context) -> list[Path]:
    out = []
    for fn in (cmd_features, cmd_performance, cmd_train_eval, cmd_explain, cmd_represent):
        out += fn(ctx)
    (ctx.path("config.yaml")).write_text(dump_config(ctx.cfg))
    return out
