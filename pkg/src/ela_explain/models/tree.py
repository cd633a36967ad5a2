"""Binary regression tree grown greedily on the absolute-deviation criterion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, SchemaMismatchError

LEAF = -1
_CHUNK = 1024


def prefix_abs_dev(v) -> np.ndarray:
    """``out[k] = sum |v[:k+1] - median(v[:k+1])|`` for every prefix.

    Uses sum(top half) - sum(bottom half) of each prefix, evaluated for all
    prefixes at once through rank-indexed cumulative sums (O(n^2) memory,
    processed in row chunks).
    """
    v = np.asarray(v, dtype=float)
    n = len(v)
    order = np.argsort(v, kind="stable")
    vals = v[order]
    out = np.empty(n)
    for start in range(0, n, _CHUNK):
        ks = np.arange(start, min(n, start + _CHUNK))
        inside = order[None, :] <= ks[:, None]          # rank r present in prefix k
        cnt = np.cumsum(inside, axis=1)
        csum = np.cumsum(np.where(inside, vals[None, :], 0.0), axis=1)
        m = ks + 1
        h = m // 2
        rows = np.arange(len(ks))
        r_lo = np.argmax(cnt >= np.maximum(h, 1)[:, None], axis=1)
        low = np.where(h > 0, csum[rows, r_lo], 0.0)
        r_hi = np.argmax(cnt >= (m - h)[:, None], axis=1)
        total = csum[:, -1]
        out[ks] = (total - csum[rows, r_hi]) - low
    return out


def best_mae_split(feature_values, targets, min_leaf: int = 1):
    """Best threshold on one feature under the absolute-deviation loss.

    Returns ``(threshold, loss)`` where ``loss`` is the size-weighted mean
    absolute deviation of the two children from their per-target medians,
    summed over targets, i.e. ``(SAD_left + SAD_right) / n``.  Ties resolve
    to the smallest threshold.  ``None`` if no admissible split exists.
    """
    x = np.asarray(feature_values, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = len(x)
    if Y.shape[0] != n:
        raise InvalidArgumentError(f"feature length {n} != target rows {Y.shape[0]}")
    if n < 2 * min_leaf or n < 2:
        return None
    order = np.argsort(x, kind="stable")
    xs = x[order]
    Ys = Y[order]
    left_size = np.arange(1, n)                       # split after position k-1
    ok = (xs[:-1] < xs[1:]) & (left_size >= min_leaf) & (n - left_size >= min_leaf)
    if not ok.any():
        return None
    sad = np.zeros(n - 1)
    for t in range(Y.shape[1]):
        pre = prefix_abs_dev(Ys[:, t])
        suf = prefix_abs_dev(Ys[::-1, t])
        sad += pre[:-1] + suf[::-1][1:]
    loss = np.where(ok, sad / n, np.inf)
    k = int(np.argmin(loss))
    thr = 0.5 * (xs[k] + xs[k + 1])
    if thr >= xs[k + 1]:  # adjacent floats
        thr = xs[k]
    return float(thr), float(loss[k])


@dataclass
class TreeModel:
    """Array-encoded binary tree.

    ``feature[i] == -1`` marks a leaf.  ``value`` holds the per-target median
    of the training rows reaching each node and ``coverage`` their count.
    Rows go left when ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    coverage: np.ndarray
    n_features: int

    @property
    def n_targets(self) -> int:
        return self.value.shape[1]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = _check_X(X, self.n_features)
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return node

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return self.value[self.apply(X[None, :])[0]].copy()
        return self.value[self.apply(X)]


def _check_X(X, n_features):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != n_features:
        raise SchemaMismatchError(f"model expects {n_features} features, got {X.shape[1]}")
    return X


class _Builder:
    def __init__(self, X, Y, max_depth, min_leaf, max_features, rng):
        self.X, self.Y = X, Y
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.rng = rng
        self.nodes = []

    def _new(self, rows):
        self.nodes.append([LEAF, 0.0, -1, -1, np.median(self.Y[rows], axis=0), len(rows)])
        return len(self.nodes) - 1

    def best_split(self, rows):
        F = self.X.shape[1]
        if self.max_features is None or self.max_features >= F:
            cands = range(F)
        else:
            cands = np.sort(self.rng.choice(F, self.max_features, replace=False))
        best = None
        Yn = self.Y[rows]
        for f in cands:
            res = best_mae_split(self.X[rows, f], Yn, self.min_leaf)
            if res is not None and (best is None or res[1] < best[2]):
                best = (int(f), res[0], res[1])
        return best

    def grow(self, rows, depth):
        node = self._new(rows)
        Yn = self.Y[rows]
        if depth >= self.max_depth or len(rows) < 2 * self.min_leaf or np.all(Yn == Yn[0]):
            return node
        split = self.best_split(rows)
        if split is None:
            return node
        f, thr, _ = split
        go_left = self.X[rows, f] <= thr
        left = self.grow(rows[go_left], depth + 1)
        right = self.grow(rows[~go_left], depth + 1)
        self.nodes[node][:4] = [f, thr, left, right]
        return node


def fit_decision_tree(X, Y, max_depth: int = 9, min_leaf: int = 1, max_features: int | None = None,
                      rng=None, n_targets: int | None = None) -> TreeModel:
    """Greedy top-down tree; nodes split on the globally best (feature, threshold).

    Splitting stops at ``max_depth``, below ``2 * min_leaf`` rows, or when all
    targets in the node are equal.  Feature-index order breaks loss ties.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or len(X) != len(Y) or len(X) < 1:
        raise InvalidArgumentError(f"incompatible shapes X{X.shape}, Y{Y.shape}")
    if n_targets is not None and Y.shape[1] != n_targets:
        raise InvalidArgumentError(f"expected {n_targets} target column(s), got {Y.shape[1]}")
    b = _Builder(X, Y, max_depth, min_leaf, max_features, np.random.default_rng(rng))
    b.grow(np.arange(len(X)), 0)
    cols = list(zip(*b.nodes))
    return TreeModel(
        feature=np.array(cols[0], dtype=int),
        threshold=np.array(cols[1], dtype=float),
        left=np.array(cols[2], dtype=int),
        right=np.array(cols[3], dtype=int),
        value=np.array(cols[4], dtype=float).reshape(len(b.nodes), Y.shape[1]),
        coverage=np.array(cols[5], dtype=float),
        n_features=X.shape[1],
    )
