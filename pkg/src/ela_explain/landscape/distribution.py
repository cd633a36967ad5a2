"""y-distribution features (``ela_distr``)."""
from __future__ import annotations

import numpy as np
from scipy import stats

from ._util import FeatureMap, require

GRID_POINTS = 512


def silverman_bandwidth(y) -> float:
    y = np.asarray(y, dtype=float)
    return 1.06 * np.std(y, ddof=1) * len(y) ** (-0.2)


def kde_grid(y, grid_points: int = GRID_POINTS):
    """Gaussian KDE of ``y`` on a regular grid over ``[min - 3bw, max + 3bw]``."""
    y = np.asarray(y, dtype=float)
    bw = silverman_bandwidth(y)
    grid = np.linspace(y.min() - 3 * bw, y.max() + 3 * bw, grid_points)
    u = (grid[:, None] - y[None, :]) / bw
    dens = np.exp(-0.5 * u * u).sum(axis=1) / (len(y) * bw * np.sqrt(2 * np.pi))
    return grid, dens


def count_peaks(dens) -> int:
    dens = np.asarray(dens)
    inner = dens[1:-1]
    return int(np.sum((inner > dens[:-2]) & (inner > dens[2:])))


def compute_ela_distr(s) -> FeatureMap:
    y = np.asarray(s.y, dtype=float)
    require(len(y) >= 4, "ela_distr needs at least 4 points")
    out = FeatureMap()
    spread = np.ptp(y)
    if spread <= 1e-12 * max(1.0, np.abs(y).max()):
        out.flags.add("ela_distr.degenerate")
        out["ela_distr.skewness"] = 0.0
        out["ela_distr.kurtosis"] = 0.0
        out["ela_distr.number_of_peaks"] = 1.0
        return out
    out["ela_distr.skewness"] = float(stats.skew(y, bias=True))
    out["ela_distr.kurtosis"] = float(stats.kurtosis(y, fisher=True, bias=True))
    _, dens = kde_grid(y)
    out["ela_distr.number_of_peaks"] = float(max(1, count_peaks(dens)))
    return out
