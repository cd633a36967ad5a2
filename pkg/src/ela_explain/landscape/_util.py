from __future__ import annotations

import numpy as np

SENTINEL = float(np.finfo(float).max)
TINY = 1e-12


class FeatureMap(dict):
    """Ordered ``name -> float`` mapping carrying a set of diagnostic flags.

    Flags never appear as columns of the map: they describe how a value was
    obtained (degenerate sample, regularised covariance, ...).
    """

    def __init__(self, *args, flags=(), **kw):
        super().__init__(*args, **kw)
        self.flags = set(flags)

    def update_from(self, other: "FeatureMap") -> None:
        self.update(other)
        self.flags |= getattr(other, "flags", set())


def safe_ratio(num: float, den: float, flags: set, name: str) -> float:
    """``num / den`` with 0/0 -> 1 and x/0 -> SENTINEL (flagged)."""
    num, den = float(num), float(den)
    if abs(den) > TINY:
        return num / den
    flags.add(name)
    if abs(num) <= TINY:
        return 1.0
    return SENTINEL if num * (1.0 if den >= 0 else -1.0) >= 0 else -SENTINEL


def pearson(a, b, flags: set, name: str) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da = a - a.mean()
    db = b - b.mean()
    den = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if den <= TINY * max(1.0, len(a)):
        flags.add(name)
        return 0.0
    return float(np.clip(np.sum(da * db) / den, -1.0, 1.0))


def require(cond: bool, msg: str) -> None:
    from ..errors import InvalidArgumentError

    if not cond:
        raise InvalidArgumentError(msg)
