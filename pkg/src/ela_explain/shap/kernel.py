"""Model-agnostic KernelSHAP with an exact efficiency constraint.

The coalition game is ``v(S) = mean_b f(x_S, b_{~S})`` over background rows
``b``.  Coefficients come from Shapley-kernel weighted least squares with
``sum(phi) = f(x) - v(empty)`` imposed by eliminating the last feature.
"""
from __future__ import annotations

import logging
from math import comb

import numpy as np

from ..errors import InvalidArgumentError
from .bruteforce import coalition_masks

log = logging.getLogger(__name__)

MAX_BACKGROUND = 100
RIDGE = 1e-10


def default_coalitions(n_features: int) -> int:
    return 2 * n_features + 2048


def shapley_kernel(F: int, size) -> np.ndarray:
    size = np.asarray(size)
    out = np.zeros(size.shape)
    ok = (size > 0) & (size < F)
    s = size[ok]
    out[ok] = (F - 1) / (np.array([comb(F, int(k)) for k in s], dtype=float) * s * (F - s))
    return out


def _as_2d(out, n):
    out = np.asarray(out, dtype=float)
    return out.reshape(n, -1)


def masked_game(predict_fn, background, x, masks, chunk: int = 20000) -> np.ndarray:
    """``v(S)`` for each row of ``masks`` (shape C x T)."""
    B, F = background.shape
    vals = []
    per = max(1, chunk // B)
    for start in range(0, len(masks), per):
        m = masks[start:start + per]
        hyb = np.where(m[:, None, :], x[None, None, :], background[None, :, :]).reshape(-1, F)
        out = _as_2d(predict_fn(hyb), len(hyb))
        vals.append(out.reshape(len(m), B, -1).mean(axis=1))
    return np.concatenate(vals, axis=0)


def sample_coalitions(F: int, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Coalitions drawn with size probability proportional to the kernel mass.

    Returns unique masks and their draw counts (used as regression weights).
    """
    sizes = np.arange(1, F)
    p = (F - 1) / (sizes * (F - sizes))
    p = p / p.sum()
    draws = rng.choice(sizes, size=n, p=p)
    masks = np.zeros((n, F), dtype=bool)
    for i, s in enumerate(draws):
        masks[i, rng.choice(F, s, replace=False)] = True
    uniq, counts = np.unique(masks, axis=0, return_counts=True)
    return uniq, counts.astype(float)


def kernel_shap(predict_fn, background, x, n_coalitions: int | None = None, seed: int = 0,
                flags: set | None = None):
    """Return ``(phi, base)`` with ``phi`` of shape (F, T).

    All ``2**F - 2`` proper coalitions are enumerated when they fit in the
    budget of ``n_coalitions`` (which counts the empty and full sets too);
    otherwise coalitions are sampled.
    """
    background = np.atleast_2d(np.asarray(background, dtype=float))
    x = np.asarray(x, dtype=float)
    F = background.shape[1]
    if x.shape != (F,):
        raise InvalidArgumentError(f"x has shape {x.shape}, background has {F} features")
    if len(background) > MAX_BACKGROUND:
        raise InvalidArgumentError(f"background has {len(background)} rows, at most {MAX_BACKGROUND} allowed")
    n_coalitions = default_coalitions(F) if n_coalitions is None else n_coalitions
    if n_coalitions < 2 * F + 2:
        raise InvalidArgumentError(f"n_coalitions must be >= 2F+2 = {2 * F + 2}, got {n_coalitions}")
    base = _as_2d(predict_fn(background), len(background)).mean(axis=0)
    fx = _as_2d(predict_fn(x[None, :]), 1)[0]
    delta = fx - base
    if F == 1:
        return delta[None, :].copy(), base
    if F < 31 and 2**F <= n_coalitions:
        masks = coalition_masks(F)[1:-1]
        weights = shapley_kernel(F, masks.sum(axis=1))
    else:
        masks, weights = sample_coalitions(F, max(1, n_coalitions - 2), np.random.default_rng(seed))
    v = masked_game(predict_fn, background, x, masks)
    Z = masks.astype(float)
    A = Z[:, :-1] - Z[:, -1:]
    rhs = v - base - Z[:, -1:] * delta
    sw = np.sqrt(weights)[:, None]
    Aw, rw = A * sw, rhs * sw
    G = Aw.T @ Aw
    try:
        if np.linalg.matrix_rank(G) < G.shape[0]:
            raise np.linalg.LinAlgError
        head = np.linalg.solve(G, Aw.T @ rw)
    except np.linalg.LinAlgError:
        log.warning("kernelshap system singular; using ridge %g", RIDGE)
        if flags is not None:
            flags.add("kernel_shap.ridge")
        head = np.linalg.solve(G + RIDGE * np.eye(G.shape[0]), Aw.T @ rw)
    phi = np.vstack([head, delta - head.sum(axis=0)])
    return phi, base
