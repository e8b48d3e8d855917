"""Run and model configuration, parsed from a single JSON document."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


ALLOWED_ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass
class ModelConfig:
    dims: list[int] = field(default_factory=lambda: [16, 16])
    activation: str = "relu"
    dropconnect: float = 0.0
    use_attention: bool = True
    trainable_curvature: bool = True
    aggregation: str = "center"
    init_curvature: float = 1.0

    def validate(self):
        if len(self.dims) < 1 or any(int(d) <= 0 for d in self.dims):
            raise ConfigError("dims must be a non-empty list of positive integers")
        if self.activation not in ALLOWED_ACTIVATIONS:
            raise ConfigError(
                f"activation {self.activation!r} not allowed; need sigma(0) = 0, "
                f"one of {ALLOWED_ACTIVATIONS}"
            )
        if not 0.0 <= self.dropconnect < 1.0:
            raise ConfigError("dropconnect must lie in [0, 1)")
        if self.aggregation not in ("center", "origin"):
            raise ConfigError("aggregation must be 'center' or 'origin'")
        if not self.init_curvature > 0:
            raise ConfigError("init_curvature must be positive")


@dataclass
class OptimConfig:
    lr: float = 0.01
    weight_decay: float = 0.0
    max_epochs: int = 500
    patience: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self):
        if self.lr < 0 or self.weight_decay < 0:
            raise ConfigError("lr and weight_decay must be non-negative")
        if self.max_epochs < 1 or self.patience < 1:
            raise ConfigError("max_epochs and patience must be >= 1")


@dataclass
class FermiDiracConfig:
    r: float = 2.0
    t: float = 1.0
    trainable: bool = False

    def validate(self):
        if not self.t > 0:
            raise ConfigError("Fermi-Dirac temperature t must be positive")


@dataclass
class RunConfig:
    task: str = "lp"
    model: str = "hgcn"
    dataset: object = "disease:n_nodes=300"
    model_config: ModelConfig = field(default_factory=ModelConfig)
    optimizer: OptimConfig = field(default_factory=OptimConfig)
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    split_seed: int = 0
    split_ratios: list[float] = field(default_factory=lambda: [0.85, 0.05, 0.10])
    lp_reg_weight: float = 0.0
    normalize_features: bool = True
    fermi_dirac: FermiDiracConfig = field(default_factory=FermiDiracConfig)
    output_dir: str = "runs/out"

    def validate(self):
        if self.task not in ("lp", "nc"):
            raise ConfigError("task must be 'lp' or 'nc'")
        if self.model not in ("hgcn", "gcn"):
            raise ConfigError("model must be 'hgcn' or 'gcn'")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if len(self.split_ratios) != 3 or abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ConfigError("split_ratios must be three fractions summing to 1")
        if any(r < 0 for r in self.split_ratios):
            raise ConfigError("split_ratios must be non-negative")
        if self.lp_reg_weight < 0:
            raise ConfigError("lp_reg_weight must be >= 0")
        if not isinstance(self.dataset, (str, dict)):
            raise ConfigError("dataset must be a 'disease:...' string or a dict of file paths")
        self.model_config.validate()
        self.optimizer.validate()
        self.fermi_dirac.validate()
        return self


_NESTED = {"model_config": ModelConfig, "optimizer": OptimConfig, "fermi_dirac": FermiDiracConfig}


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED and cls is RunConfig:
            value = _build(_NESTED[key], value, f"{where}.{key}")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def config_from_dict(data) -> RunConfig:
    return _build(RunConfig, data, "config").validate()


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)


def config_to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)
