"""Runtime configuration: JSON file first, CHARSHAPE_* environment on top."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

ENV_PREFIX = "CHARSHAPE_"


@dataclass
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8023
    store_dir: str = "sessions"
    registry_path: str | None = None  # None = bundled file
    synonyms_path: str | None = None
    snapshot_path: str | None = None
    concept_source: str = "snapshot"  # "snapshot" or "live"
    concept_base_url: str = "https://api.conceptnet.io"
    concept_fetch_limit: int = 10
    backend: str = "stub"  # "stub" or "remote"
    backend_url: str | None = None
    history_window: int = 10
    candidate_count: int = 3
    static_dir: str | None = None
    cors_origin: str = "http://localhost:5173"


def load_config(path: str | Path | None = None, env: dict[str, str] | None = None) -> AppConfig:
    """Build the config: defaults, then file values, then environment values."""
    values: dict[str, object] = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        values.update(raw)

    env = os.environ if env is None else env
    for spec in fields(AppConfig):
        env_key = ENV_PREFIX + spec.name.upper()
        if env_key in env:
            values[spec.name] = env[env_key]

    known = {spec.name: spec for spec in fields(AppConfig)}
    kwargs = {}
    for name, value in values.items():
        if name not in known:
            raise ValueError(f"unknown config key {name!r}")
        kwargs[name] = _coerce(known[name].type, value)
    return AppConfig(**kwargs)


def _coerce(type_name: object, value: object):
    if isinstance(value, str) and type_name == "int":
        return int(value)
    return value
