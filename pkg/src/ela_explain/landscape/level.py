"""Level-set features (``ela_level``): LDA/QDA separability of y-quantile classes."""
from __future__ import annotations

import numpy as np

from ._util import FeatureMap, require

QUANTILES = (0.10, 0.25, 0.50)
N_FOLDS = 10
RIDGE = 1e-8


def quantile_labels(y, q: float) -> np.ndarray:
    """1 for the ``ceil(q * n)`` smallest values of y (stable by index), else 0."""
    y = np.asarray(y, dtype=float)
    k = int(np.ceil(q * len(y)))
    labels = np.zeros(len(y), dtype=int)
    labels[np.argsort(y, kind="stable")[:k]] = 1
    return labels


def stratified_folds(labels, n_folds: int, rng) -> np.ndarray:
    labels = np.asarray(labels)
    fold = np.empty(len(labels), dtype=int)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        fold[idx] = (offset + np.arange(len(idx))) % n_folds
        offset += len(idx)
    return fold


def _inv_logdet(cov, flags, tag):
    d = cov.shape[0]
    try:
        chol = np.linalg.cholesky(cov)
        if np.min(np.diag(chol)) ** 2 < 1e-14 * max(1.0, np.trace(cov) / d):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        flags.add(tag)
        cov = cov + RIDGE * np.eye(d)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            cov = cov + (RIDGE * max(1.0, np.trace(cov))) * np.eye(d)
            chol = np.linalg.cholesky(cov)
    inv = np.linalg.inv(cov)
    return inv, 2.0 * np.sum(np.log(np.diag(chol)))


def lda_predict(Xtr, ytr, Xte, flags) -> np.ndarray:
    classes = np.unique(ytr)
    means = np.array([Xtr[ytr == c].mean(axis=0) for c in classes])
    resid = Xtr - means[np.searchsorted(classes, ytr)]
    dof = max(len(ytr) - len(classes), 1)
    cov = resid.T @ resid / dof
    inv, _ = _inv_logdet(cov, flags, "ela_level.lda_regularized")
    priors = np.array([np.mean(ytr == c) for c in classes])
    scores = Xte @ inv @ means.T - 0.5 * np.sum(means @ inv * means, axis=1) + np.log(priors)
    return classes[np.argmax(scores, axis=1)]


def qda_predict(Xtr, ytr, Xte, flags) -> np.ndarray:
    classes = np.unique(ytr)
    scores = np.empty((len(Xte), len(classes)))
    for k, c in enumerate(classes):
        Xc = Xtr[ytr == c]
        mu = Xc.mean(axis=0)
        r = Xc - mu
        cov = r.T @ r / max(len(Xc) - 1, 1)
        inv, logdet = _inv_logdet(cov, flags, "ela_level.qda_regularized")
        z = Xte - mu
        scores[:, k] = -0.5 * logdet - 0.5 * np.sum(z @ inv * z, axis=1) + np.log(len(Xc) / len(ytr))
    return classes[np.argmax(scores, axis=1)]


def cv_mmce(X, labels, predictor, n_folds: int, seed: int, flags) -> float:
    rng = np.random.default_rng(seed)
    fold = stratified_folds(labels, n_folds, rng)
    errors = []
    for k in range(n_folds):
        test = fold == k
        if not test.any():
            continue
        pred = predictor(X[~test], labels[~test], X[test], flags)
        errors.append(np.mean(pred != labels[test]))
    return float(np.mean(errors))


def compute_ela_level(s, quantiles=QUANTILES, n_folds: int = N_FOLDS, seed: int | None = None) -> FeatureMap:
    X = np.asarray(s.X, dtype=float)
    n, d = X.shape
    seed = s.seed if seed is None else seed
    out = FeatureMap()
    for q in quantiles:
        labels = quantile_labels(s.y, q)
        n_small = min(labels.sum(), n - labels.sum())
        require(n_small * (n_folds - 1) / n_folds >= 2 * d,
                f"ela_level: class sizes too small for q={q} (n={n}, d={d})")
        tag = f"{int(round(q * 100)):02d}"
        # identical fold assignment for both classifiers
        lda = cv_mmce(X, labels, lda_predict, n_folds, seed, out.flags)
        qda = cv_mmce(X, labels, qda_predict, n_folds, seed, out.flags)
        out[f"ela_level.mmce_lda_{tag}"] = lda
        out[f"ela_level.mmce_qda_{tag}"] = qda
        # error rates are resolved to 1/n; flooring keeps the ratio finite
        floor = 1.0 / n
        out[f"ela_level.lda_qda_{tag}"] = max(lda, floor) / max(qda, floor)
    return out
