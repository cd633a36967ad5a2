from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import ConfigError

FAMILIES = ("tree", "forest", "mlp")
SCENARIOS = ("STR", "MTR")
TARGETS = ("precision", "log_precision", "both")

_DEFAULTS = {
    ("tree", "STR"): {"max_depth": 9, "min_leaf": 1},
    ("tree", "MTR"): {"max_depth": 10, "min_leaf": 1},
    ("forest", "STR"): {"max_depth": 7, "n_estimators": 10, "min_leaf": 1, "bootstrap": True},
    ("forest", "MTR"): {"max_depth": 7, "n_estimators": 20, "min_leaf": 1, "bootstrap": True},
    ("mlp", "STR"): {"epochs": 100, "batch_size": 10, "learning_rate": 0.001,
                     "widths": [24, 16, 16, 12, 8], "dropout": 0.0},
    ("mlp", "MTR"): {"epochs": 100, "batch_size": 10, "learning_rate": 0.001,
                     "widths": [48, 32, 32, 24, 16], "dropout": 0.0},
}


def default_hyperparameters(family: str, scenario: str) -> dict[str, Any]:
    hp = _DEFAULTS[(family, scenario)]
    return {k: (list(v) if isinstance(v, list) else v) for k, v in hp.items()}


@dataclass(frozen=True)
class ModelSpec:
    """Regressor family, learning scenario and target selection.

    Unspecified hyperparameters are filled from the family/scenario defaults.
    """

    family: str
    scenario: str
    target_selector: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown model family {self.family!r}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.target_selector not in TARGETS:
            raise ConfigError(f"unknown target selector {self.target_selector!r}")
        if self.scenario == "STR" and self.target_selector == "both":
            raise ConfigError("STR models predict exactly one target")
        if self.scenario == "MTR" and self.target_selector != "both":
            raise ConfigError("MTR models predict both targets")
        hp = default_hyperparameters(self.family, self.scenario)
        hp.update(self.hyperparameters)
        object.__setattr__(self, "hyperparameters", hp)

    @property
    def targets(self) -> tuple[str, ...]:
        return ("precision", "log_precision") if self.target_selector == "both" else (self.target_selector,)

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def model_id(self) -> str:
        sel = {"precision": "target", "log_precision": "log_target", "both": "both"}[self.target_selector]
        return f"{self.family}-{self.scenario}-{sel}"

    def to_dict(self) -> dict:
        return {"family": self.family, "scenario": self.scenario,
                "target_selector": self.target_selector, "hyperparameters": dict(self.hyperparameters)}

    @classmethod
    def from_dict(cls, d) -> "ModelSpec":
        return cls(d["family"], d["scenario"], d["target_selector"], dict(d.get("hyperparameters", {})))


def standard_model_specs() -> list[ModelSpec]:
    """{tree, forest, mlp} x {STR-precision, STR-log, MTR}."""
    out = []
    for fam in FAMILIES:
        out.append(ModelSpec(fam, "STR", "precision"))
        out.append(ModelSpec(fam, "STR", "log_precision"))
        out.append(ModelSpec(fam, "MTR", "both"))
    return out
