"""Global explanation artifacts: rankings, model fingerprints, clustering,
top-k overlaps and per-problem error tables."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
from scipy.cluster.hierarchy import leaves_list, linkage, to_tree

from .errors import DataError, InvalidArgumentError, SchemaMismatchError


def global_importance(e, k: int | None = None, target: int = 0) -> list[tuple[str, float]]:
    """Features by mean |shap| (descending, ties by name) for one target."""
    F = len(e.feature_names)
    k = F if k is None else k
    if not 0 <= k <= F:
        raise InvalidArgumentError(f"k={k} outside [0, {F}]")
    imp = np.abs(e.shap[:, :, target]).mean(axis=0)
    ranked = sorted(zip(e.feature_names, imp.tolist()), key=lambda p: (-p[1], p[0]))
    return ranked[:k]


@dataclass(frozen=True)
class ModelRepresentation:
    """Mean signed and mean absolute Shapley values of one model on one fold."""

    model_id: str
    family: str
    scenario: str
    target: str
    fold: int
    feature_names: tuple[str, ...]
    vector: np.ndarray
    abs_vector: np.ndarray

    @property
    def key(self) -> str:
        return f"{self.model_id}[{self.target}]"


def model_representation(e, target: int | None = None, family: str = "", scenario: str = "",
                         fold: int = 0) -> ModelRepresentation:
    if target is None:
        if e.shap.shape[2] != 1:
            raise InvalidArgumentError("multi-target explanation: pick a target index")
        target = 0
    s = e.shap[:, :, target]
    tname = e.target_names[target] if e.target_names else str(target)
    return ModelRepresentation(e.model_id, family, scenario, tname, fold, tuple(e.feature_names),
                               s.mean(axis=0), np.abs(s).mean(axis=0))


def model_representations(e, family: str = "", scenario: str = "", fold: int = 0) -> list[ModelRepresentation]:
    """One representation per explained target."""
    return [model_representation(e, t, family, scenario, fold) for t in range(e.shap.shape[2])]


def average_representations(reps: Sequence[ModelRepresentation]) -> ModelRepresentation:
    """Fold-averaged representation (fold set to -1)."""
    _check_schema(reps)
    r0 = reps[0]
    return ModelRepresentation(r0.model_id, r0.family, r0.scenario, r0.target, -1, r0.feature_names,
                               np.mean([r.vector for r in reps], axis=0),
                               np.mean([r.abs_vector for r in reps], axis=0))


def _check_schema(reps):
    if not reps:
        raise InvalidArgumentError("no representations")
    names = reps[0].feature_names
    for r in reps[1:]:
        if r.feature_names != names:
            raise SchemaMismatchError(f"representation {r.key} (fold {r.fold}) has a different feature schema")


@dataclass
class Clustering:
    linkage: np.ndarray
    leaf_order: list[int]
    partition: list[int]          # top-split cluster label per input (0 holds input 0)

    def cluster_sizes(self) -> tuple[int, int]:
        p = np.asarray(self.partition)
        return int((p == 0).sum()), int((p == 1).sum())


def hierarchical_cluster(reps: Sequence[ModelRepresentation] | np.ndarray) -> Clustering:
    """Average-linkage agglomerative clustering of signed vectors (Euclidean)."""
    if isinstance(reps, np.ndarray):
        V = np.asarray(reps, dtype=float)
    else:
        _check_schema(reps)
        V = np.array([r.vector for r in reps])
    if len(V) < 2:
        raise InvalidArgumentError("clustering needs at least two representations")
    Z = linkage(V, method="average", metric="euclidean")
    root = to_tree(Z)
    right = set(root.get_right().pre_order())
    part = [1 if i in right else 0 for i in range(len(V))]
    if part[0] == 1:
        part = [1 - p for p in part]
    return Clustering(Z, leaves_list(Z).tolist(), part)


def top_features(rep: ModelRepresentation, k: int) -> list[str]:
    F = len(rep.feature_names)
    if not 0 <= k <= F:
        raise InvalidArgumentError(f"k={k} outside [0, {F}]")
    ranked = sorted(zip(rep.feature_names, rep.abs_vector.tolist()), key=lambda p: (-p[1], p[0]))
    return [n for n, _ in ranked[:k]]


@dataclass
class Intersection:
    sets: dict[str, list[str]]
    regions: dict[tuple[str, ...], list[str]]   # features held by exactly these families

    def common(self) -> list[str]:
        return self.regions.get(tuple(self.sets), [])

    def union(self) -> list[str]:
        return sorted(set().union(*map(set, self.sets.values()))) if self.sets else []


def top_k_intersection(reps_by_model: Mapping[str, ModelRepresentation | Sequence[ModelRepresentation]],
                       k: int = 10) -> Intersection:
    """Per-family top-k sets (fold-averaged, ranked by mean |shap|) and their Venn regions."""
    reps = {}
    for name, r in reps_by_model.items():
        reps[name] = r if isinstance(r, ModelRepresentation) else average_representations(list(r))
    _check_schema(list(reps.values()))
    sets = {name: top_features(r, k) for name, r in reps.items()}
    names = list(sets)
    regions = {}
    for size in range(len(names), 0, -1):
        for combo in combinations(names, size):
            inside = set.intersection(*(set(sets[c]) for c in combo))
            outside = set().union(*(set(sets[c]) for c in names if c not in combo))
            regions[combo] = sorted(inside - outside)
    return Intersection(sets, regions)


# ------------------------------------------------------------ embedding input

META_COLUMNS = ("model_id", "family", "scenario", "target", "fold")


def export_embedding_input(path, reps: Sequence[ModelRepresentation], absolute: bool = False) -> None:
    """One row per model: metadata columns followed by one column per feature."""
    names = list(reps[0].feature_names) if reps else []
    if reps:
        _check_schema(reps)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(META_COLUMNS) + names)
        for r in reps:
            vec = r.abs_vector if absolute else r.vector
            w.writerow([r.model_id, r.family, r.scenario, r.target, r.fold] + [repr(float(v)) for v in vec])


def read_embedding_input(path) -> list[ModelRepresentation]:
    """Parse an embedding CSV; ``abs_vector`` is filled with |vector|."""
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        names = tuple(header[len(META_COLUMNS):])
        out = []
        for row in rd:
            v = np.array([float(c) for c in row[len(META_COLUMNS):]])
            out.append(ModelRepresentation(row[0], row[1], row[2], row[3], int(row[4]), names, v, np.abs(v)))
    return out


# ----------------------------------------------------------------- MAE tables

def mean_row(per_problem) -> np.ndarray:
    """Unweighted mean over problems (rows) of a per-problem table."""
    arr = np.asarray(per_problem, dtype=float)
    return arr.mean(axis=0)


@dataclass
class MaeTable:
    fids: list[int]
    target_names: list[str]
    values: np.ndarray        # problems x targets
    mean: np.ndarray

    def to_dict(self) -> dict:
        return {
            "targets": list(self.target_names),
            "rows": [{"fid": f, **{t: float(v) for t, v in zip(self.target_names, row)}}
                     for f, row in zip(self.fids, self.values)],
            "mean": {t: float(v) for t, v in zip(self.target_names, self.mean)},
        }


def mae_table(predictions: Mapping[tuple[int, int], Sequence[float]],
              truth: Mapping[tuple[int, int], Sequence[float]],
              instances: Sequence[tuple[int, int]] | None = None,
              target_names: Sequence[str] | None = None) -> MaeTable:
    """Per-problem mean absolute error over its instances, plus the mean row."""
    keys = list(instances) if instances is not None else sorted(truth)
    missing = [k for k in keys if k not in predictions]
    if missing:
        raise DataError("no prediction for instances " + ", ".join(f"(fid={f}, iid={i})" for f, i in missing))
    missing = [k for k in keys if k not in truth]
    if missing:
        raise DataError("no ground truth for instances " + ", ".join(f"(fid={f}, iid={i})" for f, i in missing))
    errs: dict[int, list[np.ndarray]] = {}
    for k in keys:
        p = np.atleast_1d(np.asarray(predictions[k], dtype=float))
        t = np.atleast_1d(np.asarray(truth[k], dtype=float))
        if p.shape != t.shape:
            raise SchemaMismatchError(f"prediction/truth shapes differ for {k}: {p.shape} vs {t.shape}")
        errs.setdefault(k[0], []).append(np.abs(p - t))
    fids = sorted(errs)
    values = np.array([np.mean(errs[f], axis=0) for f in fids])
    T = values.shape[1] if values.size else 0
    names = list(target_names) if target_names is not None else [f"t{j}" for j in range(T)]
    return MaeTable(fids, names, values, mean_row(values) if fids else np.zeros(T))


# --------------------------------------------------------------------- report

REPORT_SCHEMA = {
    "type": "object",
    "required": ["config", "mae"],
    "properties": {
        "config": {"type": "object"},
        "mae": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["targets", "rows", "mean"],
                "properties": {
                    "targets": {"type": "array", "items": {"type": "string"}},
                    "rows": {"type": "array", "items": {
                        "type": "object", "required": ["fid"],
                        "properties": {"fid": {"type": "integer"}},
                        "additionalProperties": {"type": "number"}}},
                    "mean": {"type": "object", "additionalProperties": {"type": "number"}},
                },
            },
        },
        "top_k": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
        "venn": {"type": "object"},
        "clusters": {"type": "object"},
    },
}


def validate_report(report: dict) -> None:
    import jsonschema

    try:
        jsonschema.validate(report, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise DataError(f"report does not match schema: {exc.message}") from None


def _finite(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    if isinstance(o, np.generic):
        return _finite(o.item())
    return o


def write_json(path, obj) -> None:
    """Deterministic JSON (sorted keys, non-finite floats as null)."""
    with open(path, "w") as fh:
        json.dump(_finite(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
