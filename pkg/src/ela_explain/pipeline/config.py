"""Declarative run configuration (YAML) with built-in desk and paper profiles."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigError
from ..landscape import GROUPS
from ..models import ModelSpec, standard_model_specs
from ..problems import FUNCTION_NAMES


@dataclass
class SuiteConfig:
    fids: list[int]
    iids: list[int]
    dim: int


@dataclass
class SamplingConfig:
    n_per_dim: int = 50
    repetitions: int = 10
    seed: int = 0
    n_candidates: int = 30


@dataclass
class FeaturesConfig:
    groups: list[str] = field(default_factory=lambda: list(GROUPS))
    curv_points: int | None = None
    path: str | None = None             # external landscape CSV to ingest instead of computing


@dataclass
class PerformanceConfig:
    mode: str = "run"
    budget: int | None = 50_000
    runs: int = 10
    path: str | None = None


@dataclass
class ExplanationConfig:
    fold: int = 0
    local: list[int] | None = None      # [fid, iid] of the single-instance explanation
    background: int = 100
    n_coalitions: int | None = None
    top_k: int = 10


@dataclass
class RunConfig:
    suite: SuiteConfig
    sampling: SamplingConfig
    features: FeaturesConfig
    performance: PerformanceConfig
    models: list[ModelSpec]
    explanation: ExplanationConfig
    output_dir: str
    seed: int = 0

    @property
    def n_samples(self) -> int:
        return self.sampling.n_per_dim * self.suite.dim

    def to_dict(self) -> dict:
        d = {k: asdict(getattr(self, k)) for k in ("suite", "sampling", "features", "performance", "explanation")}
        d["models"] = [m.to_dict() for m in self.models]
        d["output_dir"] = self.output_dir
        d["seed"] = self.seed
        return d

    def content(self) -> dict:
        """Everything that influences outputs (the output location does not)."""
        d = self.to_dict()
        d.pop("output_dir")
        return d

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.content(), sort_keys=True).encode()).hexdigest()


def _models_dict():
    return [m.to_dict() for m in standard_model_specs()]


PROFILES = {
    "paper": {
        "suite": {"fids": list(range(1, 25)), "iids": list(range(1, 51)), "dim": 5},
        "sampling": {"n_per_dim": 50, "repetitions": 10, "seed": 0, "n_candidates": 30},
        "features": {"groups": list(GROUPS), "curv_points": None, "path": None},
        "performance": {"mode": "run", "budget": 50_000, "runs": 10, "path": None},
        "models": _models_dict(),
        "explanation": {"fold": 0, "local": [11, 1], "background": 100, "n_coalitions": None, "top_k": 10},
        "output_dir": "runs/paper",
        "seed": 0,
    },
    "desk": {
        "suite": {"fids": [1, 3, 8, 13, 21], "iids": [1, 2, 3, 4, 5], "dim": 2},
        "sampling": {"n_per_dim": 50, "repetitions": 3, "seed": 0, "n_candidates": 30},
        "features": {"groups": list(GROUPS), "curv_points": None, "path": None},
        "performance": {"mode": "run", "budget": None, "runs": 3, "path": None},
        "models": _models_dict(),
        "explanation": {"fold": 0, "local": [21, 1], "background": 100, "n_coalitions": None, "top_k": 10},
        "output_dir": "runs/desk",
        "seed": 0,
    },
}


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in out:
            raise ConfigError(f"unknown config key {where}{k!r}")
        if isinstance(out[k], dict) and isinstance(v, dict):
            out[k] = _merge(out[k], v, f"{where}{k}.")
        else:
            out[k] = v
    return out


def _section(cls, d, name):
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"config section {name!r}: {exc}") from None


def from_dict(d: dict) -> RunConfig:
    try:
        models = [ModelSpec.from_dict(m) for m in d["models"]]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad model entry: {exc}") from None
    cfg = RunConfig(
        suite=_section(SuiteConfig, d["suite"], "suite"),
        sampling=_section(SamplingConfig, d["sampling"], "sampling"),
        features=_section(FeaturesConfig, d["features"], "features"),
        performance=_section(PerformanceConfig, d["performance"], "performance"),
        models=models,
        explanation=_section(ExplanationConfig, d["explanation"], "explanation"),
        output_dir=str(d["output_dir"]),
        seed=int(d["seed"]),
    )
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    s = cfg.suite
    bad = [f for f in s.fids if f not in FUNCTION_NAMES]
    if bad:
        raise ConfigError(f"unknown fids {bad}")
    if not s.iids or min(s.iids) < 1:
        raise ConfigError("iids must be positive")
    if sorted(s.iids) != list(range(1, len(s.iids) + 1)):
        raise ConfigError("iids must be 1..n (instance-wise folds)")
    if s.dim < 2:
        raise ConfigError("dim must be >= 2")
    if cfg.sampling.repetitions < 1 or cfg.sampling.n_per_dim < 1:
        raise ConfigError("sampling needs repetitions >= 1 and n_per_dim >= 1")
    unknown = [g for g in cfg.features.groups if g not in GROUPS]
    if unknown:
        raise ConfigError(f"unknown feature groups {unknown}")
    p = cfg.performance
    if p.mode not in ("run", "ingest"):
        raise ConfigError(f"performance.mode must be run or ingest, got {p.mode!r}")
    if p.mode == "ingest" and not p.path:
        raise ConfigError("performance.mode ingest needs performance.path")
    if p.runs < 1:
        raise ConfigError("performance.runs must be >= 1")
    ids = [m.model_id for m in cfg.models]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate model ids in {ids}")
    e = cfg.explanation
    if not 0 <= e.fold < len(s.iids):
        raise ConfigError(f"explanation.fold {e.fold} outside 0..{len(s.iids) - 1}")
    if e.local is not None and (len(e.local) != 2 or e.local[0] not in s.fids or e.local[1] not in s.iids):
        raise ConfigError(f"explanation.local {e.local} is not a configured (fid, iid)")


def load_config(path=None, profile: str = "desk", seed: int | None = None,
                output_dir: str | None = None) -> RunConfig:
    """Profile defaults, overridden by the YAML file, then by explicit arguments."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}")
    d = copy.deepcopy(PROFILES[profile])
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            over = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
        if not isinstance(over, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        if "models" in over:
            d["models"] = over.pop("models")
        d = _merge(d, over)
    if seed is not None:
        d["seed"] = seed
    if output_dir is not None:
        d["output_dir"] = output_dir
    return from_dict(d)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.content(), sort_keys=False)
