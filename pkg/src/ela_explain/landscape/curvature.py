"""Gradient-norm features (``ela_curv``) by finite differences.

Every coordinate costs exactly two extra evaluations: a central stencil
inside the domain, a second-order one-sided stencil (reusing the design's
centre value) where ``x +/- h`` would leave it.
"""
from __future__ import annotations

import numpy as np

from ._util import FeatureMap, require, safe_ratio

REL_STEP = 1e-4


def gradient(ev, x, fx: float, h: float | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    lo, hi = ev.lower, ev.upper
    h = REL_STEP * (hi - lo) if h is None else h
    g = np.empty(len(x))
    for j in range(len(x)):
        e = np.zeros(len(x))
        e[j] = h
        if x[j] - h >= lo and x[j] + h <= hi:
            g[j] = (ev.evaluate(x + e) - ev.evaluate(x - e)) / (2 * h)
        elif x[j] + 2 * h <= hi:
            f1, f2 = ev.evaluate(x + e), ev.evaluate(x + 2 * e)
            g[j] = (-3 * fx + 4 * f1 - f2) / (2 * h)
        else:
            f1, f2 = ev.evaluate(x - e), ev.evaluate(x - 2 * e)
            g[j] = (3 * fx - 4 * f1 + f2) / (2 * h)
    return g


def gradient_norms(s, ev, points_budget: int) -> np.ndarray:
    require(0 < points_budget <= s.n, f"points_budget must be in 1..{s.n}")
    X = np.asarray(s.X, dtype=float)
    return np.array([np.linalg.norm(gradient(ev, X[i], float(s.y[i]))) for i in range(points_budget)])


def compute_ela_curv(s, ev, points_budget: int | None = None) -> FeatureMap:
    budget = s.n if points_budget is None else points_budget
    norms = gradient_norms(s, ev, budget)
    out = FeatureMap()
    q1, med, q3 = np.quantile(norms, [0.25, 0.5, 0.75])
    out["ela_curv.grad_norm.min"] = float(norms.min())
    out["ela_curv.grad_norm.lq"] = float(q1)
    out["ela_curv.grad_norm.mean"] = float(norms.mean())
    out["ela_curv.grad_norm.med"] = float(med)
    out["ela_curv.grad_norm.uq"] = float(q3)
    out["ela_curv.grad_norm.max"] = float(norms.max())
    out["ela_curv.grad_norm.sd"] = float(np.std(norms, ddof=1)) if len(norms) > 1 else 0.0
    mn, mx = float(norms.min()), float(norms.max())
    if mn == 0.0:
        out.flags.add("ela_curv.grad_scale")
        out["ela_curv.grad_scale"] = 1.0 if mx == 0.0 else safe_ratio(mx, 0.0, out.flags, "ela_curv.grad_scale")
    else:
        out["ela_curv.grad_scale"] = mx / mn
    return out
