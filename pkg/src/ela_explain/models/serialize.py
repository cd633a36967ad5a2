"""Versioned JSON encoding of fitted models (exact float round trip)."""
from __future__ import annotations

import json

import numpy as np

from ..errors import DataError
from .forest import ForestModel
from .mlp import MlpModel, Standardizer
from .tree import TreeModel

FORMAT = "ela-explain-model"
VERSION = 1


def _tree_dict(t: TreeModel) -> dict:
    return {"n_features": t.n_features, "feature": t.feature.tolist(), "threshold": t.threshold.tolist(),
            "left": t.left.tolist(), "right": t.right.tolist(), "value": t.value.tolist(),
            "coverage": t.coverage.tolist()}


def _tree_from(d) -> TreeModel:
    return TreeModel(np.array(d["feature"], dtype=int), np.array(d["threshold"], dtype=float),
                     np.array(d["left"], dtype=int), np.array(d["right"], dtype=int),
                     np.array(d["value"], dtype=float), np.array(d["coverage"], dtype=float),
                     int(d["n_features"]))


def model_to_dict(model) -> dict:
    if isinstance(model, TreeModel):
        body = {"kind": "tree", "tree": _tree_dict(model)}
    elif isinstance(model, ForestModel):
        body = {"kind": "forest", "seeds": model.seeds, "trees": [_tree_dict(t) for t in model.trees]}
    elif isinstance(model, MlpModel):
        st = model.standardizer
        body = {"kind": "mlp",
                "layers": [{"shape": list(w.shape), "weights": w.ravel().tolist(), "bias": b.tolist(),
                            "inputs": list(src),
                            "activation": "linear" if i == len(model.weights) - 1 else "relu"}
                           for i, (w, b, src) in enumerate(zip(model.weights, model.biases, model.inputs))],
                "dropout": model.dropout,
                "standardizer": None if st is None else {"mean": st.mean.tolist(), "scale": st.scale.tolist()}}
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    return {"format": FORMAT, "version": VERSION, **body}


def model_from_dict(d):
    if d.get("format") != FORMAT or d.get("version") != VERSION:
        raise DataError(f"unsupported model document (format={d.get('format')!r}, version={d.get('version')!r})")
    kind = d["kind"]
    if kind == "tree":
        return _tree_from(d["tree"])
    if kind == "forest":
        return ForestModel([_tree_from(t) for t in d["trees"]], list(d["seeds"]))
    if kind == "mlp":
        ws = [np.array(L["weights"], dtype=float).reshape(L["shape"]) for L in d["layers"]]
        bs = [np.array(L["bias"], dtype=float) for L in d["layers"]]
        inputs = [tuple(L["inputs"]) for L in d["layers"]]
        st = d.get("standardizer")
        st = None if st is None else Standardizer(np.array(st["mean"]), np.array(st["scale"]))
        return MlpModel(ws, bs, inputs, st, d.get("dropout", 0.0))
    raise DataError(f"unknown model kind {kind!r}")


def save_model(path, model, **meta) -> None:
    doc = model_to_dict(model)
    if meta:
        doc["meta"] = meta
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
