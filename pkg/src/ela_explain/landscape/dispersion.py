"""Dispersion features (``disp``): spread of the best points vs. the whole sample."""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist

from ._util import FeatureMap, require

QUANTILES = (0.02, 0.05, 0.10, 0.25)


def best_subset(y, q: float) -> np.ndarray:
    """Indices of the ``ceil(q * n)`` best (smallest) y values, ties by index."""
    y = np.asarray(y, dtype=float)
    k = int(np.ceil(q * len(y) - 1e-9))
    return np.argsort(y, kind="stable")[:k]


def _ratio_diff(a, b):
    if a == 0.0 and b == 0.0:
        return 1.0, 0.0
    return a / b, a - b


def compute_disp(s, quantiles=QUANTILES) -> FeatureMap:
    X = np.asarray(s.X, dtype=float)
    d_all = pdist(X)
    mean_all = float(d_all.mean())
    med_all = float(np.median(d_all))
    out = FeatureMap()
    stats = {}
    for q in quantiles:
        idx = best_subset(s.y, q)
        require(len(idx) >= 2, f"disp: quantile {q} selects fewer than 2 points")
        d_sub = pdist(X[idx])
        tag = f"{int(round(q * 100)):02d}"
        stats[tag] = (_ratio_diff(float(d_sub.mean()), mean_all),
                      _ratio_diff(float(np.median(d_sub)), med_all))
    for kind, pos in (("ratio_mean", (0, 0)), ("ratio_median", (1, 0)),
                      ("diff_mean", (0, 1)), ("diff_median", (1, 1))):
        for tag, vals in stats.items():
            out[f"disp.{kind}_{tag}"] = vals[pos[0]][pos[1]]
    return out
