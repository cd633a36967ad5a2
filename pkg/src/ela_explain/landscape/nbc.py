"""Nearest-better clustering features (``nbc``)."""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ._util import FeatureMap, pearson, require, safe_ratio

TIE_FLAG_FRACTION = 0.10


def nearest_better_distances(X, y):
    """Return ``(nn_dist, nb_dist, best_index)``.

    A point j is better than i if ``y[j] < y[i]``, or the values tie and
    ``j < i``.  The global best point receives the largest nearest-better
    distance of all other points.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    D = cdist(X, X)
    np.fill_diagonal(D, np.inf)
    nn = D.min(axis=1)
    idx = np.arange(n)
    better = (y[None, :] < y[:, None]) | ((y[None, :] == y[:, None]) & (idx[None, :] < idx[:, None]))
    nb = np.where(better, D, np.inf).min(axis=1)
    best = np.flatnonzero(~better.any(axis=1))
    assert len(best) == 1
    best = int(best[0])
    others = np.delete(nb, best)
    nb[best] = others.max()
    return nn, nb, best


def compute_nbc(s) -> FeatureMap:
    X = np.asarray(s.X, dtype=float)
    y = np.asarray(s.y, dtype=float)
    require(len(y) >= 3, "nbc needs at least 3 points")
    out = FeatureMap()
    _, counts = np.unique(y, return_counts=True)
    if counts[counts > 1].sum() > TIE_FLAG_FRACTION * len(y):
        out.flags.add("nbc.ties")
    nn, nb, _ = nearest_better_distances(X, y)
    f = out.flags
    out["nbc.nn_nb.sd_ratio"] = safe_ratio(np.std(nn, ddof=1), np.std(nb, ddof=1), f, "nbc.nn_nb.sd_ratio")
    out["nbc.nn_nb.mean_ratio"] = safe_ratio(nn.mean(), nb.mean(), f, "nbc.nn_nb.mean_ratio")
    out["nbc.nn_nb.cor"] = pearson(nn, nb, f, "nbc.nn_nb.cor")
    if np.all(nn > 0):
        q = nb / nn
        out["nbc.dist_ratio.coeff_var"] = safe_ratio(np.std(q, ddof=1), q.mean(), f,
                                                     "nbc.dist_ratio.coeff_var")
    else:
        f.add("nbc.dist_ratio.coeff_var")
        out["nbc.dist_ratio.coeff_var"] = 0.0
    out["nbc.nb_fitness.cor"] = pearson(nb, y, f, "nbc.nb_fitness.cor")
    return out
