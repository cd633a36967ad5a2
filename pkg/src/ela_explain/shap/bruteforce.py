"""Shapley values by explicit subset enumeration (validation oracle)."""
from __future__ import annotations

from math import factorial

import numpy as np

from ..errors import InvalidArgumentError
from ..models.tree import LEAF

MAX_FEATURES = 20


def coalition_masks(F: int) -> np.ndarray:
    """Row ``s`` is the membership vector of the subset with bit pattern ``s``."""
    idx = np.arange(2**F)
    return ((idx[:, None] >> np.arange(F)[None, :]) & 1).astype(bool)


def tree_game_values(tree, x) -> np.ndarray:
    """``v(S)`` for all ``2**F`` coalitions: E[tree | x_S] with coverage-weighted descent."""
    x = np.asarray(x, dtype=float)
    masks = coalition_masks(tree.n_features)

    def expect(node):
        if tree.feature[node] == LEAF:
            return np.broadcast_to(tree.value[node], (len(masks), tree.n_targets))
        f = tree.feature[node]
        l, r = tree.left[node], tree.right[node]
        el, er = expect(l), expect(r)
        hot = el if x[f] <= tree.threshold[node] else er
        mix = (tree.coverage[l] * el + tree.coverage[r] * er) / tree.coverage[node]
        return np.where(masks[:, f:f + 1], hot, mix)

    return np.array(expect(0))


def shapley_from_game(values) -> np.ndarray:
    """Shapley values from a table of ``2**F`` coalition values (rows by bit pattern)."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    F = n.bit_length() - 1
    if 2**F != n:
        raise InvalidArgumentError("game table length must be a power of two")
    sizes = np.array([bin(s).count("1") for s in range(n)])
    weight = np.array([factorial(k) * factorial(F - k - 1) / factorial(F) if k < F else 0.0 for k in range(F + 1)])
    phi = np.zeros((F, values.shape[1]))
    idx = np.arange(n)
    for f in range(F):
        without = idx[(idx >> f) & 1 == 0]
        with_f = without | (1 << f)
        phi[f] = (weight[sizes[without], None] * (values[with_f] - values[without])).sum(axis=0)
    return phi


def brute_force_shap(tree, x):
    """Return ``(phi, base)`` for the same game as :func:`tree_shap`."""
    if tree.n_features > MAX_FEATURES:
        raise InvalidArgumentError(f"brute force refuses F={tree.n_features} > {MAX_FEATURES}")
    v = tree_game_values(tree, x)
    return shapley_from_game(v), v[0].copy()
