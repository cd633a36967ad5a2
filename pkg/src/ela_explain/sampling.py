"""Space-filling designs and evaluated design samples."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import InvalidArgumentError

N_CANDIDATES = 30


@dataclass(frozen=True)
class DesignSample:
    X: np.ndarray
    y: np.ndarray
    repetition_index: int
    seed: int

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def latin_hypercube(dim: int, n: int, bounds=(0.0, 1.0), rng=None) -> np.ndarray:
    """Plain LHS: one uniformly jittered point per stratum and coordinate."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if dim < 1:
        raise InvalidArgumentError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(rng)
    lo, hi = _bounds(bounds, dim)
    strata = np.stack([rng.permutation(n) for _ in range(dim)], axis=1)
    u = (strata + rng.random((n, dim))) / n
    return lo + u * (hi - lo)


def min_pairwise_distance(X) -> float:
    if len(X) < 2:
        return np.inf
    return float(pdist(X).min())


def improved_lhs(dim: int, n: int, bounds=(0.0, 1.0), seed: int = 0,
                 n_candidates: int = N_CANDIDATES) -> np.ndarray:
    """Maximin Latin hypercube.

    Draws ``n_candidates`` Latin hypercubes from one seeded stream and keeps
    the one with the largest minimum pairwise Euclidean distance.  Ties keep
    the earliest candidate, so the first candidate equals
    ``latin_hypercube(dim, n, bounds, rng=np.random.default_rng(seed))``.
    """
    if n_candidates < 1:
        raise InvalidArgumentError("n_candidates must be >= 1")
    rng = np.random.default_rng(seed)
    best, best_d = None, -np.inf
    for _ in range(n_candidates):
        cand = latin_hypercube(dim, n, bounds, rng)
        d = min_pairwise_distance(cand)
        if d > best_d:
            best, best_d = cand, d
    return best


def _bounds(bounds, dim):
    lo, hi = bounds
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (dim,))
    if np.any(hi <= lo):
        raise InvalidArgumentError("upper bounds must exceed lower bounds")
    return lo, hi


def build_design(ev, n: int, repetitions: int, base_seed: int,
                 n_candidates: int = N_CANDIDATES) -> list[DesignSample]:
    """Evaluate ``repetitions`` independent maximin LHS designs on ``ev``.

    Repetition ``r`` uses seed ``base_seed + r`` regardless of how many
    repetitions are requested.
    """
    if repetitions < 1:
        raise InvalidArgumentError(f"repetitions must be >= 1, got {repetitions}")
    out = []
    for r in range(repetitions):
        seed = base_seed + r
        X = improved_lhs(ev.dim, n, ev.bounds, seed, n_candidates)
        y = ev.evaluate_batch(X)
        out.append(DesignSample(X, y, r, seed))
    return out


def write_design_csv(path, sample: DesignSample) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(sample.dim)] + ["y"])
        for row, val in zip(sample.X, sample.y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(val))])


def read_design_csv(path, repetition_index=0, seed=-1) -> DesignSample:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return DesignSample(data[:, :-1], data[:, -1], repetition_index, seed)
