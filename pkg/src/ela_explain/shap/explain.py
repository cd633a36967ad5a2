"""Per-row explanations for a fitted model and their tabular export."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InvalidArgumentError, SchemaMismatchError
from ..models.forest import ForestModel
from ..models.tree import TreeModel
from .kernel import MAX_BACKGROUND, kernel_shap
from .treeshap import forest_shap, tree_shap


@dataclass
class Explanation:
    """``shap[i, f, t]`` explains target ``t`` of row ``i``; ``base_value`` has shape (T,)."""

    model_id: str
    dataset_id: str
    base_value: np.ndarray
    shap: np.ndarray
    feature_names: list[str]
    X: np.ndarray
    prediction: np.ndarray
    instance_ids: list[str] = field(default_factory=list)
    target_names: list[str] = field(default_factory=list)
    flags: set[str] = field(default_factory=set)

    @property
    def n_targets(self) -> int:
        return self.shap.shape[2]

    def efficiency_gap(self) -> float:
        """Largest |sum(phi) + base - prediction| over rows and targets."""
        return float(np.max(np.abs(self.shap.sum(axis=1) + self.base_value - self.prediction)))


def select_background(X, size: int = MAX_BACKGROUND, seed: int = 0) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if len(X) <= size:
        return X.copy()
    idx = np.sort(np.random.default_rng(seed).choice(len(X), size, replace=False))
    return X[idx]


def explain_dataset(model, X, background=None, feature_names: Sequence[str] | None = None,
                    model_id: str = "model", dataset_id: str = "data",
                    instance_ids: Sequence[str] | None = None, target_names: Sequence[str] | None = None,
                    n_coalitions: int | None = None, seed: int = 0) -> Explanation:
    """Exact TreeSHAP for trees and forests, KernelSHAP for anything else.

    ``background`` is only used by KernelSHAP; it defaults to (a seeded
    subsample of at most 100 rows of) ``X``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, F = X.shape
    names = list(feature_names) if feature_names is not None else [f"x{j + 1}" for j in range(F)]
    if len(names) != F:
        raise SchemaMismatchError(f"{len(names)} feature names for {F} columns")
    pred = np.asarray(model.predict(X), dtype=float).reshape(n, -1)
    T = pred.shape[1]
    shap = np.zeros((n, F, T))
    flags: set[str] = set()
    if isinstance(model, (TreeModel, ForestModel)):
        fn = tree_shap if isinstance(model, TreeModel) else forest_shap
        base = None
        for i in range(n):
            shap[i], base = fn(model, X[i])
        if base is None:
            base = np.zeros(T)
    else:
        bg = select_background(X if background is None else background, MAX_BACKGROUND, seed)
        base = None
        for i in range(n):
            shap[i], base = kernel_shap(model.predict, bg, X[i], n_coalitions, seed + i, flags)
    ids = list(instance_ids) if instance_ids is not None else [str(i) for i in range(n)]
    if len(ids) != n:
        raise InvalidArgumentError(f"{len(ids)} instance ids for {n} rows")
    tnames = list(target_names) if target_names is not None else [f"t{t}" for t in range(T)]
    return Explanation(model_id, dataset_id, np.asarray(base, dtype=float), shap, names, X, pred,
                       ids, tnames, flags)


def write_explanation_csv(path, e: Explanation) -> None:
    """Long-form rows: instance_id, feature, target, feature_value, shap_value, base_value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance_id", "feature", "target", "feature_value", "shap_value", "base_value"])
        for i, iid in enumerate(e.instance_ids):
            for f, name in enumerate(e.feature_names):
                for t, tname in enumerate(e.target_names):
                    w.writerow([iid, name, tname, repr(float(e.X[i, f])), repr(float(e.shap[i, f, t])),
                                repr(float(e.base_value[t]))])


def write_prediction_csv(path, e: Explanation) -> None:
    """Model output per row and target (needed to audit efficiency from the exports)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance_id", "target", "prediction", "base_value"])
        for i, iid in enumerate(e.instance_ids):
            for t, tname in enumerate(e.target_names):
                w.writerow([iid, tname, repr(float(e.prediction[i, t])), repr(float(e.base_value[t]))])


def read_explanation_csv(path, prediction_path=None) -> Explanation:
    """Rebuild an :class:`Explanation` from the long-form export."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ids = list(dict.fromkeys(r["instance_id"] for r in rows))
    feats = list(dict.fromkeys(r["feature"] for r in rows))
    targets = list(dict.fromkeys(r["target"] for r in rows))
    ii = {k: i for i, k in enumerate(ids)}
    fi = {k: i for i, k in enumerate(feats)}
    ti = {k: i for i, k in enumerate(targets)}
    shap = np.zeros((len(ids), len(feats), len(targets)))
    X = np.zeros((len(ids), len(feats)))
    base = np.zeros(len(targets))
    for r in rows:
        i, f, t = ii[r["instance_id"]], fi[r["feature"]], ti[r["target"]]
        shap[i, f, t] = float(r["shap_value"])
        X[i, f] = float(r["feature_value"])
        base[t] = float(r["base_value"])
    pred = shap.sum(axis=1) + base
    if prediction_path is not None:
        with open(prediction_path, newline="") as fh:
            for r in csv.DictReader(fh):
                pred[ii[r["instance_id"]], ti[r["target"]]] = float(r["prediction"])
    return Explanation("", "", base, shap, feats, X, pred, ids, targets)
