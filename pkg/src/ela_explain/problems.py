"""Noiseless BBOB-style benchmark suite (24 functions) with seeded instances.

The base functions follow the published BBOB definitions.  Instance
transformations (optimum shift, rotations, f-offset) are drawn from a
generator seeded with ``fid * 1000 + iid``; they are *not* bit-compatible
with COCO.

>>> ev = make_problem(1, 1, 5)
>>> ev.precision(ev.evaluate(ev.x_opt))
0.0
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError

LOWER = -5.0
UPPER = 5.0
N_FUNCTIONS = 24

FUNCTION_NAMES = {
    1: "sphere",
    2: "separable ellipsoid",
    3: "rastrigin",
    4: "bueche-rastrigin",
    5: "linear slope",
    6: "attractive sector",
    7: "step ellipsoid",
    8: "rosenbrock",
    9: "rosenbrock rotated",
    10: "ellipsoid",
    11: "discus",
    12: "bent cigar",
    13: "sharp ridge",
    14: "different powers",
    15: "rastrigin rotated",
    16: "weierstrass",
    17: "schaffers f7",
    18: "schaffers f7 ill-conditioned",
    19: "griewank-rosenbrock",
    20: "schwefel",
    21: "gallagher 101 peaks",
    22: "gallagher 21 peaks",
    23: "katsuura",
    24: "lunacek bi-rastrigin",
}


@dataclass(frozen=True)
class ProblemInstance:
    fid: int
    iid: int
    dim: int

    def __post_init__(self):
        if not isinstance(self.fid, (int, np.integer)) or not 1 <= self.fid <= N_FUNCTIONS:
            raise InvalidArgumentError(f"fid must be in 1..{N_FUNCTIONS}, got {self.fid!r}")
        if not isinstance(self.iid, (int, np.integer)) or self.iid < 1:
            raise InvalidArgumentError(f"iid must be >= 1, got {self.iid!r}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise InvalidArgumentError(f"dim must be >= 2, got {self.dim!r}")

    @property
    def key(self) -> tuple[int, int]:
        return (int(self.fid), int(self.iid))


def instance_seed(fid: int, iid: int) -> int:
    return fid * 1000 + iid


# ----------------------------------------------------------------- transforms

def _t_osz(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0
    xh = np.log(np.abs(x[nz]))
    pos = x[nz] > 0
    c1 = np.where(pos, 10.0, 5.5)
    c2 = np.where(pos, 7.9, 3.1)
    out[nz] = np.sign(x[nz]) * np.exp(xh + 0.049 * (np.sin(c1 * xh) + np.sin(c2 * xh)))
    return out


def _t_asy(x, beta):
    d = x.shape[-1]
    expo = 1 + beta * np.arange(d) / (d - 1) * np.sqrt(np.maximum(x, 0.0))
    return np.where(x > 0, np.power(np.maximum(x, 0.0), expo), x)


def _lambda(alpha, d):
    return alpha ** (0.5 * np.arange(d) / (d - 1))


def _f_pen(x):
    return np.sum(np.maximum(0.0, np.abs(x) - 5.0) ** 2, axis=-1)


def _rotation(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def _signs(rng, d):
    return np.where(rng.random(d) < 0.5, -1.0, 1.0)


# --------------------------------------------------------------- construction

class _Params:
    """Random instance parameters; only the ones a function needs are drawn."""

    def __init__(self, fid, dim, rng):
        self.fid = fid
        self.dim = dim
        x = 8.0 * np.floor(1e4 * rng.random(dim)) / 1e4 - 4.0
        x[x == 0] = -1e-5
        self.xopt = x
        self.fopt = float(np.clip(np.round(100.0 * rng.standard_cauchy(), 2), -1000.0, 1000.0))
        self.R = _rotation(rng, dim)
        self.Q = _rotation(rng, dim)
        self.signs = _signs(rng, dim)
        self.rng = rng


def _build(fid: int, dim: int, seed: int):
    """Return (vectorised objective over rows, x_opt)."""
    rng = np.random.default_rng(seed)
    p = _Params(fid, dim, rng)
    d = dim
    xopt, fopt, R, Q = p.xopt, p.fopt, p.R, p.Q
    idx = np.arange(d)

    if fid == 1:
        def f(X):
            return np.sum((X - xopt) ** 2, axis=1) + fopt

    elif fid == 2:
        w = 10.0 ** (6.0 * idx / (d - 1))

        def f(X):
            return _t_osz(X - xopt) ** 2 @ w + fopt

    elif fid == 3:
        lam = _lambda(10.0, d)

        def f(X):
            z = lam * _t_asy(_t_osz(X - xopt), 0.2)
            return 10.0 * (d - np.sum(np.cos(2 * np.pi * z), axis=1)) + np.sum(z**2, axis=1) + fopt

    elif fid == 4:
        xopt = xopt.copy()
        xopt[::2] = np.abs(xopt[::2])
        base = 10.0 ** (0.5 * idx / (d - 1))
        odd = (idx % 2) == 0  # 1-based odd coordinates

        def f(X):
            z = _t_osz(X - xopt)
            s = np.where((z > 0) & odd, 10.0 * base, base)
            z = s * z
            return (10.0 * (d - np.sum(np.cos(2 * np.pi * z), axis=1)) + np.sum(z**2, axis=1)
                    + 100.0 * _f_pen(X) + fopt)

    elif fid == 5:
        xopt = 5.0 * p.signs
        s = p.signs * 10.0 ** (idx / (d - 1))

        def f(X):
            z = np.where(xopt * X < 25.0, X, xopt)
            return np.sum(5.0 * np.abs(s) - s * z, axis=1) + fopt

    elif fid == 6:
        M = Q @ np.diag(_lambda(10.0, d)) @ R

        def f(X):
            z = (X - xopt) @ M.T
            s = np.where(z * xopt > 0, 100.0, 1.0)
            return _t_osz(np.sum((s * z) ** 2, axis=1)) ** 0.9 + fopt

    elif fid == 7:
        M = np.diag(_lambda(10.0, d)) @ R
        w = 10.0 ** (2.0 * idx / (d - 1))

        def f(X):
            zh = (X - xopt) @ M.T
            zt = np.where(np.abs(zh) > 0.5, np.floor(0.5 + zh), np.floor(0.5 + 10.0 * zh) / 10.0)
            z = zt @ Q.T
            return 0.1 * np.maximum(np.abs(zh[:, 0]) / 1e4, (z**2) @ w) + _f_pen(X) + fopt

    elif fid == 8:
        xopt = 0.75 * xopt
        c = max(1.0, np.sqrt(d) / 8.0)

        def f(X):
            z = c * (X - xopt) + 1.0
            return _rosen(z) + fopt

    elif fid == 9:
        c = max(1.0, np.sqrt(d) / 8.0)
        xopt = R.T @ np.full(d, 0.5 / c)

        def f(X):
            z = c * (X @ R.T) + 0.5
            return _rosen(z) + fopt

    elif fid == 10:
        w = 10.0 ** (6.0 * idx / (d - 1))

        def f(X):
            z = _t_osz((X - xopt) @ R.T)
            return (z**2) @ w + fopt

    elif fid == 11:
        w = np.ones(d)
        w[0] = 1e6

        def f(X):
            z = _t_osz((X - xopt) @ R.T)
            return (z**2) @ w + fopt

    elif fid == 12:
        w = np.full(d, 1e6)
        w[0] = 1.0

        def f(X):
            z = _t_asy((X - xopt) @ R.T, 0.5) @ R.T
            return (z**2) @ w + fopt

    elif fid == 13:
        M = Q @ np.diag(_lambda(10.0, d)) @ R

        def f(X):
            z = (X - xopt) @ M.T
            return z[:, 0] ** 2 + 100.0 * np.sqrt(np.sum(z[:, 1:] ** 2, axis=1)) + fopt

    elif fid == 14:
        expo = 2.0 + 4.0 * idx / (d - 1)

        def f(X):
            z = (X - xopt) @ R.T
            return np.sqrt(np.sum(np.abs(z) ** expo, axis=1)) + fopt

    elif fid == 15:
        M = R @ np.diag(_lambda(10.0, d)) @ Q

        def f(X):
            z = _t_asy(_t_osz((X - xopt) @ R.T), 0.2) @ M.T
            return 10.0 * (d - np.sum(np.cos(2 * np.pi * z), axis=1)) + np.sum(z**2, axis=1) + fopt

    elif fid == 16:
        M = R @ np.diag(_lambda(0.01, d)) @ Q
        k = np.arange(12)
        amp = 0.5**k
        freq = 3.0**k
        f0 = float(np.sum(amp * np.cos(np.pi * freq)))

        def f(X):
            z = _t_osz((X - xopt) @ R.T) @ M.T
            terms = np.cos(2 * np.pi * freq * (z[..., None] + 0.5)) @ amp
            return 10.0 * (np.mean(terms, axis=1) - f0) ** 3 + 10.0 / d * _f_pen(X) + fopt

    elif fid in (17, 18):
        cond = 10.0 if fid == 17 else 1000.0
        lam = _lambda(cond, d)

        def f(X):
            z = lam * (_t_asy((X - xopt) @ R.T, 0.5) @ Q.T)
            s = np.sqrt(z[:, :-1] ** 2 + z[:, 1:] ** 2)
            inner = np.sqrt(s) + np.sqrt(s) * np.sin(50.0 * s**0.2) ** 2
            return np.mean(inner, axis=1) ** 2 + 10.0 * _f_pen(X) + fopt

    elif fid == 19:
        c = max(1.0, np.sqrt(d) / 8.0)
        xopt = R.T @ np.full(d, 0.5 / c)

        def f(X):
            z = c * (X @ R.T) + 0.5
            s = 100.0 * (z[:, :-1] ** 2 - z[:, 1:]) ** 2 + (z[:, :-1] - 1.0) ** 2
            return 10.0 / (d - 1) * np.sum(s / 4000.0 - np.cos(s), axis=1) + 10.0 + fopt

    elif fid == 20:
        xopt = 4.2096874633 / 2.0 * p.signs
        lam = _lambda(10.0, d)
        two_abs = 2.0 * np.abs(xopt)

        def f(X):
            xh = 2.0 * p.signs * X
            zh = xh.copy()
            zh[:, 1:] += 0.25 * (xh[:, :-1] - two_abs[:-1])
            z = 100.0 * (lam * (zh - two_abs) + two_abs)
            val = -np.sum(z * np.sin(np.sqrt(np.abs(z))), axis=1) / (100.0 * d)
            return val + 4.189828872724339 + 100.0 * _f_pen(z / 100.0) + fopt

    elif fid in (21, 22):
        f, xopt = _gallagher(fid, d, p)

    elif fid == 23:
        M = Q @ np.diag(_lambda(100.0, d)) @ R
        pw = 2.0 ** np.arange(1, 33)
        expo = 10.0 / d**1.2

        def f(X):
            z = (X - xopt) @ M.T
            t = pw * z[..., None]
            inner = np.sum(np.abs(t - np.round(t)) / pw, axis=2)
            prod = np.prod((1.0 + (idx + 1) * inner) ** expo, axis=1)
            return 10.0 / d**2 * prod - 10.0 / d**2 + _f_pen(X) + fopt

    elif fid == 24:
        mu0 = 2.5
        s_ = 1.0 - 1.0 / (2.0 * np.sqrt(d + 20.0) - 8.2)
        mu1 = -np.sqrt((mu0**2 - 1.0) / s_)
        xopt = mu0 / 2.0 * p.signs
        M = Q @ np.diag(_lambda(100.0, d)) @ R

        def f(X):
            xh = 2.0 * p.signs * X
            z = (xh - mu0) @ M.T
            a = np.sum((xh - mu0) ** 2, axis=1)
            b = d + s_ * np.sum((xh - mu1) ** 2, axis=1)
            return (np.minimum(a, b) + 10.0 * (d - np.sum(np.cos(2 * np.pi * z), axis=1))
                    + 1e4 * _f_pen(X) + fopt)

    else:  # pragma: no cover - guarded by ProblemInstance
        raise InvalidArgumentError(f"unknown fid {fid}")
    return f, np.asarray(xopt, dtype=float), fopt


def _rosen(z):
    return np.sum(100.0 * (z[:, :-1] ** 2 - z[:, 1:]) ** 2 + (z[:, :-1] - 1.0) ** 2, axis=1)


def _gallagher(fid, d, p):
    rng, R, fopt = p.rng, p.R, p.fopt
    if fid == 21:
        m, alpha_top, span, span_top = 101, 1000.0, 4.9, 3.92
    else:
        m, alpha_top, span, span_top = 21, 1000.0**2, 3.92, 3.92
    weights = np.empty(m)
    weights[0] = 10.0
    weights[1:] = 1.1 + 8.0 * np.arange(m - 1) / (m - 2)
    powers = 1000.0 ** (2.0 * np.arange(m - 1) / (m - 2))
    alphas = np.concatenate([[alpha_top], rng.permutation(powers)])
    cdiag = np.empty((m, d))
    base = np.arange(d) / (d - 1)
    for i in range(m):
        cdiag[i] = rng.permutation(alphas[i] ** base) / alphas[i] ** 0.25
    peaks = rng.uniform(-span, span, size=(m, d))
    peaks[0] = rng.uniform(-span_top, span_top, size=d)
    peaks_r = peaks @ R.T

    def f(X):
        diff = (X @ R.T)[:, None, :] - peaks_r[None, :, :]
        quad = np.sum(cdiag[None] * diff**2, axis=2)
        g = np.max(weights * np.exp(-quad / (2.0 * d)), axis=1)
        return _t_osz(10.0 - g) ** 2 + _f_pen(X) + fopt

    return f, peaks[0]


# ----------------------------------------------------------------- evaluator

class ProblemEvaluator:
    """A bound objective on ``[lower, upper]^dim`` with a known optimum.

    ``evaluations`` counts every evaluated point, including the rows of
    :meth:`evaluate_batch`.  The optimum value is computed once at
    construction and is not charged to the counter.
    """

    def __init__(self, instance: ProblemInstance | None, func: Callable[[np.ndarray], np.ndarray],
                 dim: int, x_opt, optimum_value: float | None = None,
                 lower: float = LOWER, upper: float = UPPER):
        self.instance = instance
        self.dim = int(dim)
        self.lower = float(lower)
        self.upper = float(upper)
        self._func = func
        self.x_opt = np.array(x_opt, dtype=float)
        self.x_opt.setflags(write=False)
        if optimum_value is None:
            optimum_value = float(func(self.x_opt[None, :])[0])
        self.optimum_value = float(optimum_value)
        self.evaluations = 0

    @classmethod
    def from_function(cls, func, dim, x_opt=None, optimum_value=None, vectorized=False, **kw):
        """Wrap an arbitrary objective (mainly for stubs and tests).

        ``func`` maps a length-``dim`` vector to a float unless ``vectorized``.
        """
        if vectorized:
            batch = func
        else:
            def batch(X):
                return np.array([float(func(row)) for row in X])
        if x_opt is None:
            x_opt = np.zeros(dim)
        return cls(None, batch, dim, x_opt, optimum_value, **kw)

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    def _check(self, X):
        if X.shape[-1] != self.dim:
            raise DimensionMismatchError(f"expected vectors of length {self.dim}, got {X.shape[-1]}")

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DimensionMismatchError(f"evaluate expects a vector, got shape {x.shape}")
        self._check(x)
        self.evaluations += 1
        return float(self._func(x[None, :])[0])

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self._check(X)
        self.evaluations += X.shape[0]
        return np.asarray(self._func(X), dtype=float)

    def precision(self, f_value):
        return np.asarray(f_value, dtype=float) - self.optimum_value if np.ndim(f_value) \
            else float(f_value) - self.optimum_value

    def __call__(self, x):
        return self.evaluate(x)

    def __repr__(self):
        tag = f"f{self.instance.fid} i{self.instance.iid}" if self.instance else "custom"
        return f"ProblemEvaluator({tag}, dim={self.dim}, evaluations={self.evaluations})"


def make_problem(fid: int, iid: int, dim: int) -> ProblemEvaluator:
    """Build the evaluator for instance ``iid`` of function ``fid`` in ``dim`` dimensions."""
    inst = ProblemInstance(fid, iid, dim)
    func, x_opt, _ = _build(int(fid), int(dim), instance_seed(int(fid), int(iid)))
    return ProblemEvaluator(inst, func, dim, x_opt)


def evaluate(ev: ProblemEvaluator, x) -> float:
    return ev.evaluate(x)


def precision(ev: ProblemEvaluator, f_value: float) -> float:
    return ev.precision(f_value)


def suite(fids: Iterable[int] = range(1, 25), iids: Iterable[int] = range(1, 51),
          dim: int = 5) -> list[ProblemInstance]:
    return [ProblemInstance(int(f), int(i), int(dim)) for f in fids for i in iids]


def write_suite_manifest(path, instances: Iterable[ProblemInstance]) -> None:
    """CSV ``fid,iid,dim,optimum_value`` for every instance."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fid", "iid", "dim", "optimum_value"])
        for inst in instances:
            ev = make_problem(inst.fid, inst.iid, inst.dim)
            w.writerow([inst.fid, inst.iid, inst.dim, repr(ev.optimum_value)])
