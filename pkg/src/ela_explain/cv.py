"""Instance-wise cross-validation: fold ``k`` holds instance ``k+1`` of every problem."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, ElaExplainError, InvalidArgumentError
from .models import ModelSpec, fit_model

log = logging.getLogger(__name__)

Key = tuple[int, int]


@dataclass(frozen=True)
class FoldPlan:
    n_folds: int
    assignment: dict[Key, int]

    def test_keys(self, k: int) -> list[Key]:
        return sorted(key for key, f in self.assignment.items() if f == k)

    def train_keys(self, k: int) -> list[Key]:
        return sorted(key for key, f in self.assignment.items() if f != k)

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.n_folds
        for f in self.assignment.values():
            sizes[f] += 1
        return sizes


def _key(inst) -> Key:
    if isinstance(inst, tuple):
        return int(inst[0]), int(inst[1])
    return inst.fid, inst.iid


def build_fold_plan(instances, n_folds: int) -> FoldPlan:
    """Assign ``(fid, iid) -> iid - 1``; every problem needs iids ``1..n_folds``."""
    if n_folds < 2:
        raise InvalidArgumentError(f"n_folds must be >= 2, got {n_folds}")
    keys = [_key(i) for i in instances]
    by_fid: dict[int, list[int]] = {}
    for fid, iid in keys:
        by_fid.setdefault(fid, []).append(iid)
    problems = []
    want = set(range(1, n_folds + 1))
    for fid in sorted(by_fid):
        iids = by_fid[fid]
        dup = sorted({i for i in iids if iids.count(i) > 1})
        miss = sorted(want - set(iids))
        extra = sorted(set(iids) - want)
        problems += [f"(fid={fid}, missing iid={i})" for i in miss]
        problems += [f"(fid={fid}, unexpected iid={i})" for i in extra]
        problems += [f"(fid={fid}, duplicate iid={i})" for i in dup]
    if problems:
        raise DataError(f"instances do not form a {n_folds}-fold plan: " + ", ".join(problems))
    return FoldPlan(n_folds, {k: k[1] - 1 for k in sorted(keys)})


def write_fold_plan_csv(path, plan: FoldPlan) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fid", "iid", "fold"])
        for (fid, iid), f in sorted(plan.assignment.items()):
            w.writerow([fid, iid, f])


def read_fold_plan_csv(path) -> FoldPlan:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assignment = {(int(r["fid"]), int(r["iid"])): int(r["fold"]) for r in rows}
    return FoldPlan(max(assignment.values()) + 1 if assignment else 0, assignment)


@dataclass
class CvResult:
    spec: ModelSpec
    plan: FoldPlan
    keys: list[Key]
    models: list
    train_index: list[np.ndarray]
    test_index: list[np.ndarray]
    predictions: dict[Key, np.ndarray] = field(default_factory=dict)

    def prediction_matrix(self) -> np.ndarray:
        return np.array([self.predictions[k] for k in self.keys])


def run_cv(keys: Sequence[Key], X, Y, spec: ModelSpec, plan: FoldPlan, seed: int = 0,
           jobs: int = 1) -> CvResult:
    """Fit one model per fold on the other folds; predict the held-out fold.

    ``Y`` holds exactly the columns of ``spec.targets``.  Fold ``k`` is
    seeded with ``seed + k``.
    """
    keys = [_key(k) for k in keys]
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if len(keys) != len(X) or len(X) != len(Y):
        raise InvalidArgumentError(f"{len(keys)} keys, {len(X)} feature rows, {len(Y)} target rows")
    missing = [k for k in keys if k not in plan.assignment]
    if missing:
        raise DataError("instances not in fold plan: " + ", ".join(map(str, missing)))
    fold_of = np.array([plan.assignment[k] for k in keys])
    train_idx = [np.flatnonzero(fold_of != k) for k in range(plan.n_folds)]
    test_idx = [np.flatnonzero(fold_of == k) for k in range(plan.n_folds)]

    def one(k):
        try:
            m = fit_model(spec, X[train_idx[k]], Y[train_idx[k]], seed + k)
            return m, np.asarray(m.predict(X[test_idx[k]])).reshape(len(test_idx[k]), -1)
        except ElaExplainError as exc:
            raise type(exc)(f"{spec.model_id} fold {k}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(one, range(plan.n_folds)))
    else:
        results = [one(k) for k in range(plan.n_folds)]
    preds = {}
    for k, (_, p) in enumerate(results):
        for i, row in zip(test_idx[k], p):
            preds[keys[i]] = row
    log.info("%s: %d folds done", spec.model_id, plan.n_folds)
    return CvResult(spec, plan, keys, [m for m, _ in results], train_idx, test_idx, preds)
