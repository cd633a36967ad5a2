"""Linear and quadratic meta-model features (``ela_meta``)."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from ._util import FeatureMap, require, safe_ratio


def design_matrices(X) -> dict[str, np.ndarray]:
    """Regressor matrices (with intercept column) of the four meta-models."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    one = np.ones((n, 1))
    pairs = [X[:, i] * X[:, j] for i, j in combinations(range(d), 2)]
    inter = np.column_stack(pairs) if pairs else np.empty((n, 0))
    sq = X**2
    return {
        "lin_simple": np.hstack([one, X]),
        "lin_w_interact": np.hstack([one, X, inter]),
        "quad_simple": np.hstack([one, X, sq]),
        "quad_w_interact": np.hstack([one, X, sq, inter]),
    }


def adjusted_r2(A, y, coef) -> float:
    y = np.asarray(y, dtype=float)
    n, p1 = A.shape
    resid = y - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-24 * max(1.0, float(y @ y)):
        return 1.0
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p1)


def compute_ela_meta(s) -> FeatureMap:
    X = np.asarray(s.X, dtype=float)
    y = np.asarray(s.y, dtype=float)
    n, d = X.shape
    n_full = 1 + d + d * (d + 1) // 2
    require(n >= 2 * n_full, f"ela_meta needs n >= {2 * n_full} for d={d}, got {n}")
    out = FeatureMap()
    if np.ptp(y) == 0:
        out.flags.add("ela_meta.constant_y")
    coefs = {}
    for name, A in design_matrices(X).items():
        coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
        if rank < A.shape[1]:
            out.flags.add(f"ela_meta.{name}.rank_deficient")
        coefs[name] = coef
        out[f"ela_meta.{name}.adj_r2"] = float(adjusted_r2(A, y, coef))
    lin = np.abs(coefs["lin_simple"][1:])
    out["ela_meta.lin_simple.coef.min"] = float(lin.min())
    out["ela_meta.lin_simple.coef.max"] = float(lin.max())
    out["ela_meta.lin_simple.coef.max_by_min"] = safe_ratio(
        lin.max(), lin.min(), out.flags, "ela_meta.lin_simple.coef.max_by_min")
    quad = np.abs(coefs["quad_simple"][1 + d:])
    # quadratic terms below the numerical floor of the fit count as exact zeros
    floor = 1e-10 * max(1.0, float(np.std(y)))
    qmax = quad.max() if quad.max() > floor else 0.0
    qmin = quad.min() if quad.min() > floor else 0.0
    out["ela_meta.quad_simple.cond"] = safe_ratio(qmax, qmin, out.flags, "ela_meta.quad_simple.cond")
    order = ["lin_simple.adj_r2", "lin_simple.coef.min", "lin_simple.coef.max",
             "lin_simple.coef.max_by_min", "lin_w_interact.adj_r2", "quad_simple.adj_r2",
             "quad_simple.cond", "quad_w_interact.adj_r2"]
    ordered = FeatureMap({f"ela_meta.{k}": out[f"ela_meta.{k}"] for k in order}, flags=out.flags)
    return ordered
