"""Run configuration: JSON files validated against the shipped schema.

Schema validation catches shape errors with a deterministic message naming
the offending key; defaults live in the dataclasses, not the schema, so the
schema states only what a file may contain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema


class ConfigError(Exception):
    pass


def load_schema() -> dict:
    text = resources.files("lrlab").joinpath("config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class ModelConfig:
    name: str
    length: int
    j: float = 1.0
    g: float = 1.0
    h: float = 1.0
    truncation: int = 4


@dataclass(frozen=True)
class ObservableConfig:
    op_site: int = 0
    op_pauli: str = "Z"
    oq_sites: tuple = ()
    oq_pauli: str = "Z"


@dataclass(frozen=True)
class TimeGridConfig:
    start: float = 0.0
    stop: float = 3.0
    points: int = 61

    def times(self) -> tuple:
        if self.points == 1:
            return (self.start,)
        step = (self.stop - self.start) / (self.points - 1)
        return tuple(self.start + k * step for k in range(self.points))


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    observables: ObservableConfig = field(default_factory=ObservableConfig)
    time_grid: TimeGridConfig = field(default_factory=TimeGridConfig)
    lam: float | None = None
    methods: tuple = ("closed_form", "series_exact_cn")
    chain_order: int = 12
    series_tol: float = 1e-9
    slack: float = 1e-9
    bound_scale: float = 1.0
    threshold: float = 1e-3
    projected: bool = False
    occupation_cap: int | None = None


def _validate(raw: dict) -> None:
    schema = load_schema()
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(
        validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path))
    )
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at '{where}': {err.message}")


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _validate(raw)

    model = ModelConfig(**raw["model"])
    obs_raw = dict(raw.get("observables", {}))
    if "oq_sites" in obs_raw:
        obs_raw["oq_sites"] = tuple(obs_raw["oq_sites"])
    observables = ObservableConfig(**obs_raw)
    time_grid = TimeGridConfig(**raw.get("time_grid", {}))

    kwargs = {}
    for key in (
        "methods",
        "chain_order",
        "series_tol",
        "slack",
        "bound_scale",
        "threshold",
        "projected",
        "occupation_cap",
    ):
        if key in raw:
            kwargs[key] = tuple(raw[key]) if key == "methods" else raw[key]
    if "lambda" in raw:
        kwargs["lam"] = raw["lambda"]
    cfg = RunConfig(
        model=model, observables=observables, time_grid=time_grid, **kwargs
    )
    if cfg.time_grid.stop < cfg.time_grid.start:
        raise ConfigError("config invalid at 'time_grid': stop precedes start")
    return cfg
