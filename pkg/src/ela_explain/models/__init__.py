"""Regressors: MAE decision tree, bagged MAE forest and a small MLP."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from .forest import ForestModel, fit_random_forest
from .mlp import MlpModel, Standardizer, fit_mlp, init_mlp
from .serialize import load_model, model_from_dict, model_to_dict, save_model
from .spec import ModelSpec, default_hyperparameters, standard_model_specs
from .tree import TreeModel, best_mae_split, fit_decision_tree


def fit_model(spec: ModelSpec, X, Y, seed: int = 0):
    """Fit the model described by ``spec``; ``Y`` has one column per target."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[1] != spec.n_targets:
        raise InvalidArgumentError(f"{spec.model_id} expects {spec.n_targets} target column(s), got {Y.shape[1]}")
    hp = spec.hyperparameters
    if spec.family == "tree":
        return fit_decision_tree(X, Y, hp["max_depth"], hp.get("min_leaf", 1), hp.get("max_features"), seed)
    if spec.family == "forest":
        return fit_random_forest(X, Y, hp["n_estimators"], hp["max_depth"], hp.get("min_leaf", 1),
                                 hp.get("max_features", "third"), hp.get("bootstrap", True), seed)
    return fit_mlp(X, Y, hp["epochs"], hp["batch_size"], hp["learning_rate"], tuple(hp["widths"]),
                   hp.get("dropout", 0.0), seed)


def predict(model, x) -> np.ndarray:
    """Model output for one row (length-T vector) or a matrix of rows (n x T)."""
    return model.predict(x)


__all__ = [
    "ModelSpec", "default_hyperparameters", "standard_model_specs", "TreeModel", "ForestModel", "MlpModel",
    "Standardizer", "best_mae_split", "fit_decision_tree", "fit_random_forest", "fit_mlp", "init_mlp",
    "fit_model", "predict", "save_model", "load_model", "model_to_dict", "model_from_dict",
]
