"""Exploratory landscape analysis features.

Groups: ``ela_distr``, ``ela_meta``, ``ela_level``, ``disp``, ``ic``,
``nbc`` and ``ela_curv``.  Feature names are ``<group>.<name>``; the
ordered name set is the schema ``ela-explain/v1``.
"""
from ._util import SENTINEL, FeatureMap
from .curvature import compute_ela_curv
from .dispersion import compute_disp
from .distribution import compute_ela_distr
from .information import compute_ic
from .level import compute_ela_level
from .meta import compute_ela_meta
from .nbc import compute_nbc
from .records import (
    GROUPS,
    SCHEMA_VERSION,
    FeatureConfig,
    FeatureRecord,
    aggregate_repetitions,
    compute_features,
    read_landscape_csv,
    write_flags_csv,
    write_landscape_csv,
)

__all__ = [
    "SENTINEL", "FeatureMap", "GROUPS", "SCHEMA_VERSION", "FeatureConfig", "FeatureRecord",
    "compute_ela_distr", "compute_ela_meta", "compute_ela_level", "compute_disp", "compute_ic",
    "compute_nbc", "compute_ela_curv", "compute_features", "aggregate_repetitions",
    "read_landscape_csv", "write_landscape_csv", "write_flags_csv",
]
