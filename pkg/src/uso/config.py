"""Run configuration: flat ``key = value`` files merged with CLI overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Mapping

from uso.errors import ConfigError
from uso.field_geometry import FieldSpec, parse_field
from uso.params import PARAM_NAMES, ModelParams
from uso.uso_metric import DISTANCE_WEIGHTS

RUN_KEYS = ("field", "distance_weight", "threads", "velocity_window")
CONFIG_FILENAME = "config.resolved"


@dataclass(frozen=True)
class RunConfig:
    field_name: str = "threes"
    field: FieldSpec = parse_field("threes")
    params: ModelParams = ModelParams()
    distance_weight: str = "decreasing"
    threads: int = 1
    velocity_window: int = 1

    def render(self) -> str:
        """Resolved result-affecting keys, sorted, one ``key = value`` per line.

        ``threads`` is left out: it never changes outputs.
        """
        items = {
            "field": self.field_name,
            "distance_weight": self.distance_weight,
            "velocity_window": self.velocity_window,
        }
        items.update({f.name: getattr(self.params, f.name) for f in fields(ModelParams)})
        return "".join(f"{k} = {items[k]}\n" for k in sorted(items))

    def write(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / CONFIG_FILENAME).write_text(self.render())


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def resolve(file_values: Mapping[str, str] | None = None,
            overrides: Mapping[str, object] | None = None) -> RunConfig:
    """Merge config-file values with overrides (overrides win) and validate."""
    merged: dict[str, object] = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(merged) - set(RUN_KEYS) - set(PARAM_NAMES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        field_name = str(merged.get("field", "threes"))
        param_values = {k: float(merged[k]) for k in PARAM_NAMES if k in merged}
        params = replace(ModelParams(), **param_values)
        threads = int(merged.get("threads", os.cpu_count() or 1))
        window = int(merged.get("velocity_window", 1))
        cfg = RunConfig(field_name, parse_field(field_name), params,
                        str(merged.get("distance_weight", "decreasing")), threads, window)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if cfg.distance_weight not in DISTANCE_WEIGHTS:
        raise ConfigError(f"distance_weight must be one of {DISTANCE_WEIGHTS}")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.velocity_window < 1 or cfg.velocity_window % 2 == 0:
        raise ConfigError("velocity_window must be a positive odd integer")
    return cfg
