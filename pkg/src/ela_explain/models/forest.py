from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import TreeModel, fit_decision_tree


@dataclass
class ForestModel:
    trees: list[TreeModel]
    seeds: list[int]

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    @property
    def n_targets(self) -> int:
        return self.trees[0].n_targets

    def predict(self, X) -> np.ndarray:
        preds = [t.predict(X) for t in self.trees]
        return np.mean(preds, axis=0)


def fit_random_forest(X, Y, n_estimators: int = 10, max_depth: int = 7, min_leaf: int = 1,
                      max_features: int | str | None = "third", bootstrap: bool = True,
                      seed: int = 0) -> ForestModel:
    """Bagged MAE trees with ``ceil(F / 3)`` candidate features per split by default."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, F = X.shape
    if max_features == "third":
        max_features = math.ceil(F / 3)
    seeds = np.random.SeedSequence(seed).generate_state(n_estimators, dtype=np.uint32).tolist()
    trees = []
    for s in seeds:
        rng = np.random.default_rng(s)
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        trees.append(fit_decision_tree(X[rows], Y[rows], max_depth, min_leaf, max_features, rng))
    return ForestModel(trees, [int(s) for s in seeds])
