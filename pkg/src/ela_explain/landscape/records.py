from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import DataError, SchemaMismatchError
from ..problems import ProblemInstance
from ._util import FeatureMap
from .curvature import compute_ela_curv
from .dispersion import QUANTILES as DISP_QUANTILES
from .dispersion import compute_disp
from .distribution import compute_ela_distr
from .information import compute_ic
from .level import QUANTILES as LEVEL_QUANTILES
from .level import compute_ela_level
from .meta import compute_ela_meta
from .nbc import compute_nbc

SCHEMA_VERSION = "ela-explain/v1"
GROUPS = ("ela_distr", "ela_meta", "ela_level", "disp", "ic", "nbc", "ela_curv")
MISSING = {"", "NA", "NaN", "nan", "null"}
KEY_COLUMNS = ("fid", "iid", "dim")


@dataclass(frozen=True)
class FeatureConfig:
    groups: tuple[str, ...] = GROUPS
    level_quantiles: tuple[float, ...] = LEVEL_QUANTILES
    disp_quantiles: tuple[float, ...] = DISP_QUANTILES
    curv_points: int | None = None  # None: every design point


@dataclass
class FeatureRecord:
    instance: ProblemInstance
    values: dict[str, float]
    feature_schema_version: str = SCHEMA_VERSION
    flags: set[str] = field(default_factory=set)

    @property
    def names(self) -> list[str]:
        return list(self.values)


def compute_features(sample, ev=None, config: FeatureConfig = FeatureConfig()) -> FeatureMap:
    """All configured feature groups for one design sample, in schema order."""
    out = FeatureMap()
    for g in config.groups:
        if g == "ela_distr":
            out.update_from(compute_ela_distr(sample))
        elif g == "ela_meta":
            out.update_from(compute_ela_meta(sample))
        elif g == "ela_level":
            out.update_from(compute_ela_level(sample, config.level_quantiles))
        elif g == "disp":
            out.update_from(compute_disp(sample, config.disp_quantiles))
        elif g == "ic":
            out.update_from(compute_ic(sample))
        elif g == "nbc":
            out.update_from(compute_nbc(sample))
        elif g == "ela_curv":
            if ev is None:
                raise ValueError("ela_curv needs an evaluator")
            out.update_from(compute_ela_curv(sample, ev, config.curv_points))
        else:
            raise ValueError(f"unknown feature group {g!r}")
    return out


def aggregate_repetitions(records: Sequence[Mapping[str, float]], R: int | None = None) -> FeatureMap:
    """Per-feature median over repetitions (schema must match exactly)."""
    if not records:
        raise ValueError("no records to aggregate")
    if R is not None and len(records) != R:
        raise ValueError(f"expected {R} repetitions, got {len(records)}")
    names = list(records[0])
    for k, rec in enumerate(records[1:], start=1):
        if list(rec) != names:
            extra = [n for n in rec if n not in names]
            missing = [n for n in names if n not in rec]
            bad = (extra or missing or [a for a, b in zip(names, rec) if a != b])[0]
            raise SchemaMismatchError(f"repetition {k} diverges from schema at feature {bad!r}")
    vals = np.array([[float(r[n]) for n in names] for r in records])
    med = np.median(vals, axis=0)
    out = FeatureMap(zip(names, med.tolist()))
    for r in records:
        out.flags |= getattr(r, "flags", set())
    return out


# ------------------------------------------------------------------- CSV I/O

def _fmt(v: float) -> str:
    return "NA" if isinstance(v, float) and math.isnan(v) else repr(float(v))


def write_landscape_csv(path, rows: Iterable[tuple[ProblemInstance, int | None, Mapping[str, float]]],
                        per_repetition: bool) -> None:
    """Write ``fid,iid,dim[,rep],<features...>`` rows."""
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        names = list(rows[0][2]) if rows else []
        w.writerow(list(KEY_COLUMNS) + (["rep"] if per_repetition else []) + names)
        for inst, rep, vals in rows:
            if list(vals) != names:
                raise SchemaMismatchError(f"instance {inst.key} has a different feature schema")
            key = [inst.fid, inst.iid, inst.dim] + ([rep] if per_repetition else [])
            w.writerow(key + [_fmt(vals[n]) for n in names])


def read_landscape_csv(path) -> list[FeatureRecord]:
    """Read a computed or external landscape CSV.

    Files with a ``rep`` column are aggregated by median per instance.
    Missing markers are read as NaN.
    """
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        try:
            header = next(rd)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        for col in KEY_COLUMNS[:2]:
            if col not in header:
                raise DataError(f"{path}: missing column {col!r}")
        key_cols = [c for c in ("fid", "iid", "dim", "rep") if c in header]
        feat_cols = [c for c in header if c not in key_cols]
        groups: dict[tuple, list[dict]] = {}
        for lineno, row in enumerate(rd, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            cell = dict(zip(header, row))
            try:
                fid, iid = int(cell["fid"]), int(cell["iid"])
                dim = int(cell["dim"]) if "dim" in cell else 5
                vals = {c: (math.nan if cell[c].strip() in MISSING else float(cell[c])) for c in feat_cols}
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            groups.setdefault((fid, iid, dim), []).append(vals)
    out = []
    for (fid, iid, dim), reps in groups.items():
        if "rep" not in header and len(reps) > 1:
            raise DataError(f"{path}: duplicate rows for (fid={fid}, iid={iid})")
        vals = reps[0] if len(reps) == 1 else dict(aggregate_repetitions(reps))
        out.append(FeatureRecord(ProblemInstance(fid, iid, dim), dict(vals)))
    return out


def write_flags_csv(path, rows: Iterable[tuple[ProblemInstance, int | None, Iterable[str]]]) -> None:
    """Sidecar of degenerate-sample flags: one ``fid,iid,dim,rep,flag`` row per flag."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(KEY_COLUMNS) + ["rep", "flag"])
        for inst, rep, flags in rows:
            for flag in sorted(flags):
                w.writerow([inst.fid, inst.iid, inst.dim, "" if rep is None else rep, flag])
