"""Pipeline configuration and the plain-text ``key = value`` config file format."""

from __future__ import annotations

import ast
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

# name tables live here so the CLI can build its parser without importing the numeric modules
MODEL_ORDER = ("naive_bayes", "knn", "adaboost", "gbm", "xgboost", "lightgbm")
METHODS = ("none", "smote", "smote_tomek", "adasyn")
SHADOW_SCOPES = ("undecided", "unrejected", "all")


@dataclass
class PipelineConfig:
    input: str = ""
    out: str = "runs/latest"
    resample: str = "smote_tomek"
    models: tuple = MODEL_ORDER
    leakage_safe: bool = False
    seed: int = 0
    test_fraction: float = 0.2
    boruta_max_iter: int = 100
    boruta_alpha: float = 0.05
    boruta_trees: int | None = None
    boruta_cache: str | None = None
    boruta_shadow_scope: str = "unrejected"
    dbscan_eps: float = 0.5
    dbscan_min_pts: int = 5
    k_neighbors: int = 5
    beta: float = 1.0
    grid_search: bool = False
    folds: int = 5
    threads: int = 1
    model_params: dict = field(default_factory=dict)   # model -> {param: value}
    grids: dict = field(default_factory=dict)          # model -> {param: [values]}

    def validate(self) -> "PipelineConfig":
        if self.resample not in METHODS:
            raise ConfigError(f"resample must be one of {METHODS}, got {self.resample!r}")
        unknown = [m for m in self.models if m not in MODEL_ORDER]
        if unknown:
            raise ConfigError(f"unknown models {unknown}; choose from {list(MODEL_ORDER)}")
        if not self.models:
            raise ConfigError("at least one model is required")
        for name in list(self.model_params) + list(self.grids):
            if name not in MODEL_ORDER:
                raise ConfigError(f"parameters given for unknown model {name!r}")
        if self.boruta_shadow_scope not in SHADOW_SCOPES:
            raise ConfigError(f"boruta_shadow_scope must be one of {SHADOW_SCOPES}")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.input and not Path(self.input).is_file():
            raise ConfigError(f"input file not found: {self.input}")
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["models"] = list(self.models)
        return d


def parse_value(text: str):
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null"):
        return None
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; values are Python-style literals or bare strings."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = parse_value(value)
    return out


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def apply_settings(config: PipelineConfig, settings: dict) -> PipelineConfig:
    """Overlay flat settings on ``config``.

    ``<model>.<param>`` sets a model hyperparameter and ``grid.<model>.<param>``
    a grid axis (a list); anything else must name a config field.
    """
    for key, value in settings.items():
        parts = key.split(".")
        if parts[0] == "grid" and len(parts) == 3:
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"{key} must be a list")
            config.grids.setdefault(parts[1], {})[parts[2]] = list(value)
        elif len(parts) == 2:
            config.model_params.setdefault(parts[0], {})[parts[1]] = value
        elif key in _FIELDS:
            if key == "models":
                value = tuple(value.split(",")) if isinstance(value, str) else tuple(value)
            setattr(config, key, value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return config
