"""Information-content features (``ic``) along a nearest-neighbour tour."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ._util import FeatureMap, require

N_EPS = 200
SETTLING = 0.05
EPS_LOW = 1e-5


@dataclass(frozen=True)
class Tour:
    order: np.ndarray   # visiting order (indices into the sample)
    steps: np.ndarray   # Euclidean length of each step, len(order) - 1
    dy: np.ndarray      # y differences along the tour


def nearest_neighbour_tour(X, y, seed: int) -> Tour:
    """Greedy tour: seeded random start, then always the nearest unvisited point.

    Distance ties resolve to the lowest index.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(X)
    D = cdist(X, X)
    rng = np.random.default_rng(seed)
    cur = int(rng.integers(n))
    visited = np.zeros(n, dtype=bool)
    order = [cur]
    visited[cur] = True
    for _ in range(n - 1):
        row = np.where(visited, np.inf, D[cur])
        cur = int(np.argmin(row))
        visited[cur] = True
        order.append(cur)
    order = np.array(order)
    steps = D[order[:-1], order[1:]]
    return Tour(order, steps, np.diff(y[order]))


def symbols(dy, steps, eps: float) -> np.ndarray:
    """psi in {-1, 0, 1}: sign of the y change once it exceeds ``eps * step``."""
    thr = eps * steps
    return np.where(dy > thr, 1, np.where(dy < -thr, -1, 0))


def entropy(psi) -> float:
    """Entropy (base 6) of consecutive unequal symbol pairs."""
    psi = np.asarray(psi)
    m = len(psi) - 1
    if m < 1:
        return 0.0
    a, b = psi[:-1], psi[1:]
    h = 0.0
    for p in (-1, 0, 1):
        for q in (-1, 0, 1):
            if p == q:
                continue
            c = np.count_nonzero((a == p) & (b == q))
            if c:
                frac = c / m
                h -= frac * np.log(frac) / np.log(6.0)
    return h


def partial_information(psi) -> float:
    """Fraction of slope changes among consecutive non-zero symbols."""
    psi = np.asarray(psi)
    nz = psi[psi != 0]
    m = len(psi) - 1
    if m < 1 or len(nz) == 0:
        return 0.0
    changes = np.count_nonzero(nz[1:] != nz[:-1])
    return changes / m


def epsilon_grid(tour: Tour, y, n_eps: int = N_EPS) -> np.ndarray:
    y_range = float(np.ptp(y))
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.where(tour.steps > 0, np.abs(tour.dy) / tour.steps, 0.0)
    top = max(y_range, float(slopes.max(initial=0.0)))
    return np.logspace(np.log10(EPS_LOW * y_range), np.log10(top), n_eps)


def entropy_curve(tour: Tour, eps_grid) -> np.ndarray:
    return np.array([entropy(symbols(tour.dy, tour.steps, e)) for e in eps_grid])


def compute_ic(s, seed: int | None = None, n_eps: int = N_EPS) -> FeatureMap:
    X = np.asarray(s.X, dtype=float)
    y = np.asarray(s.y, dtype=float)
    require(len(y) >= 10, "ic needs at least 10 points")
    seed = s.seed if seed is None else seed
    out = FeatureMap()
    tour = nearest_neighbour_tour(X, y, seed)
    if np.ptp(y) == 0 or not np.any(tour.steps > 0):
        out.flags.add("ic.degenerate")
        out.update({"ic.h_max": 0.0, "ic.eps_s": 0.0, "ic.eps_max": 0.0,
                    "ic.eps_ratio": 0.0, "ic.m0": 0.0})
        return out
    grid = epsilon_grid(tour, y, n_eps)
    H = entropy_curve(tour, grid)
    i_max = int(np.argmax(H))
    below = np.flatnonzero(H < SETTLING)
    eps_s = float(grid[below[0]]) if len(below) else float(grid[-1])
    if not len(below):
        out.flags.add("ic.unsettled")
    eps_max = float(grid[i_max])
    out["ic.h_max"] = float(H[i_max])
    out["ic.eps_s"] = eps_s
    out["ic.eps_max"] = eps_max
    out["ic.eps_ratio"] = float(np.log10(eps_max / eps_s))
    out["ic.m0"] = float(partial_information(symbols(tour.dy, tour.steps, 0.0)))
    return out
