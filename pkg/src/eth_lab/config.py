"""Run configuration with a fail-closed schema.

A run is reproducible from its config plus the package version: every CSV
produced by the command-line tool carries a JSON sidecar echoing the full
configuration.  Unknown configuration keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or unknown configuration content (exit code 2)."""


@dataclass
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    delta: float = 0.55
    lam: float = 0.0
    bc: str = "PBC"
    hz1: float = 0.1
    L: int = 8
    M: int = 0
    sectors: list = field(default_factory=list)
    observable: str = "zn"
    n_states: int = 100
    seed: int = 0
    bins: int | None = None
    central_fraction: float = 0.5
    omega_max: float | None = None
    sigma: float | None = None
    t_max: float = 100.0
    n_times: int = 200
    init: str = "neel"
    check: str = "semicircle"
    dim: int = 1000
    n_samples: int = 100000
    sizes: list = field(default_factory=list)
    site: int | None = None
    output_dir: str = "."
    cache_dir: str | None = None

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {self.schema_version}")
        if self.bc not in ("PBC", "OBC"):
            raise ConfigError(f"bc must be PBC or OBC, got {self.bc!r}")

    def as_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Config from JSON file with flag overrides; unknown keys rejected."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
