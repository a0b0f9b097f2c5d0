"""Run configuration with precedence flags > config file > environment >
defaults. Every run persists its resolved config beside the outputs so any
run is reproducible from (config, seed, transcripts)."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

ENV_PREFIX = "CONTRACHECK_"


@dataclass
class RunConfig:
    """Resolved settings for a detection run.

    The hyperparameter defaults are the reference operating point: 10 agent
    steps with 15 passages per search, 20 passages per baseline query,
    reranking on, decision threshold 0.5.
    """

    snapshot_path: str | None = None
    index_path: str | None = None
    facts_path: str | None = None
    output_dir: str | None = None
    provider: str = "scripted"
    transcript_path: str | None = None
    cases_path: str | None = None
    base_url: str | None = None
    model: str | None = None
    system: str = "agent"
    budget: int = 10
    k_search: int = 15
    k_baseline: int = 20
    rerank: bool = True
    threshold: float = 0.5
    count_threshold: int = 1
    embedder_dim: int = 256
    seed: int = 0
    jobs: int = 1

    def to_record(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_BOOL_FIELDS = {"rerank"}
_INT_FIELDS = {"budget", "k_search", "k_baseline", "count_threshold", "embedder_dim", "seed", "jobs"}
_FLOAT_FIELDS = {"threshold"}


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    if name in _BOOL_FIELDS:
        if isinstance(value, bool):
            return value
        lowered = str(value).strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean for {name}: {value!r}")
    if name in _INT_FIELDS:
        try:
            return int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse integer for {name}: {value!r}") from exc
    if name in _FLOAT_FIELDS:
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse float for {name}: {value!r}") from exc
    return value


def resolve_config(
    flags: Mapping[str, Any] | None = None,
    config_file: str | Path | None = None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge settings by precedence. `flags` entries with value None count as
    unset so CLI defaults pass through cleanly."""
    merged: dict[str, Any] = {}
    env = os.environ if env is None else env
    for field_name in _FIELD_TYPES:
        env_value = env.get(ENV_PREFIX + field_name.upper())
        if env_value is not None:
            merged[field_name] = _coerce(field_name, env_value)
    if config_file is not None:
        path = Path(config_file)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        unknown = set(loaded) - set(_FIELD_TYPES)
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
        for name, value in loaded.items():
            merged[name] = _coerce(name, value)
    for name, value in (flags or {}).items():
        if name not in _FIELD_TYPES:
            raise ConfigError(f"unknown config field {name!r}")
        if value is not None:
            merged[name] = _coerce(name, value)
    return RunConfig(**merged)


def save_resolved_config(config: RunConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(config.to_record(), ensure_ascii=False, sort_keys=True, indent=2) + "\n")
