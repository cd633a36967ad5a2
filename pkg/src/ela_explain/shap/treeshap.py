"""Exact path-dependent TreeSHAP (polynomial time).

Masked features are marginalised by descending both children weighted by
their training coverage.  Leaf values may be vectors (one Shapley value per
target).
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from ..models.tree import LEAF


def expected_value(tree) -> np.ndarray:
    """Coverage-weighted mean of the leaf values (the empty-coalition value)."""
    leaves = tree.feature == LEAF
    return (tree.coverage[leaves, None] * tree.value[leaves]).sum(axis=0) / tree.coverage[0]


def _check_coverage(tree):
    if np.any(tree.coverage <= 0):
        raise InvalidArgumentError("tree has nodes without training coverage")


def _extend(feat, zero, one, w, depth, z, o, f):
    feat.append(f)
    zero.append(z)
    one.append(o)
    w.append(1.0 if depth == 0 else 0.0)
    for i in range(depth - 1, -1, -1):
        w[i + 1] += o * w[i] * (i + 1) / (depth + 1)
        w[i] = z * w[i] * (depth - i) / (depth + 1)


def _unwind(feat, zero, one, w, depth, k):
    o, z = one[k], zero[k]
    nxt = w[depth]
    for i in range(depth - 1, -1, -1):
        if o != 0:
            tmp = w[i]
            w[i] = nxt * (depth + 1) / ((i + 1) * o)
            nxt = tmp - w[i] * z * (depth - i) / (depth + 1)
        else:
            w[i] = w[i] * (depth + 1) / (z * (depth - i))
    for lst in (feat, zero, one):
        del lst[k]
    del w[depth]


def _unwound_sum(zero, one, w, depth, k):
    o, z = one[k], zero[k]
    nxt = w[depth]
    total = 0.0
    for i in range(depth - 1, -1, -1):
        if o != 0:
            tmp = nxt * (depth + 1) / ((i + 1) * o)
            total += tmp
            nxt = w[i] - tmp * z * (depth - i) / (depth + 1)
        else:
            total += w[i] / (z * (depth - i) / (depth + 1))
    return total


def tree_shap(tree, x):
    """Return ``(phi, base)`` with ``phi`` of shape (F, T) and ``base`` of shape (T,)."""
    _check_coverage(tree)
    x = np.asarray(x, dtype=float)
    if x.shape != (tree.n_features,):
        raise InvalidArgumentError(f"expected a vector of {tree.n_features} features, got shape {x.shape}")
    phi = np.zeros((tree.n_features, tree.n_targets))
    feature, thr, left, right = tree.feature, tree.threshold, tree.left, tree.right
    cov, value = tree.coverage, tree.value

    def recurse(node, feat, zero, one, w, pz, po, pf):
        feat, zero, one, w = feat[:], zero[:], one[:], w[:]
        depth = len(feat)
        _extend(feat, zero, one, w, depth, pz, po, pf)
        if feature[node] == LEAF:
            for i in range(1, depth + 1):
                s = _unwound_sum(zero, one, w, depth, i)
                phi[feat[i]] += s * (one[i] - zero[i]) * value[node]
            return
        f = feature[node]
        if x[f] <= thr[node]:
            hot, cold = left[node], right[node]
        else:
            hot, cold = right[node], left[node]
        iz, io = 1.0, 1.0
        for k in range(1, depth + 1):
            if feat[k] == f:
                iz, io = zero[k], one[k]
                _unwind(feat, zero, one, w, depth, k)
                break
        recurse(hot, feat, zero, one, w, iz * cov[hot] / cov[node], io, f)
        recurse(cold, feat, zero, one, w, iz * cov[cold] / cov[node], 0.0, f)

    recurse(0, [], [], [], [], 1.0, 1.0, -1)
    return phi, expected_value(tree)


def forest_shap(forest, x):
    """Mean of the member trees' Shapley values and base values."""
    parts = [tree_shap(t, x) for t in forest.trees]
    return np.mean([p for p, _ in parts], axis=0), np.mean([b for _, b in parts], axis=0)
