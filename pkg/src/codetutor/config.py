"""Layered configuration: built-in defaults <- JSON file <- environment.

Zero configuration is a valid deployment: offline templates, process
backend, in-repo sqlite file.  Only `serve` additionally requires
TUTOR_SALT, checked at startup rather than per request.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import levels
from .provider import ProviderSettings
from .sandbox import SandboxConfig
from .store import DEFAULT_RETENTION_DAYS

ENV_PROVIDER_URL = "TUTOR_PROVIDER_URL"
ENV_PROVIDER_KEY = "TUTOR_PROVIDER_KEY"
ENV_SANDBOX = "TUTOR_SANDBOX"
ENV_SALT = "TUTOR_SALT"
ENV_RETENTION = "TUTOR_RETENTION_DAYS"
ENV_HARNESS = "TUTOR_HARNESS"


@dataclass
class AppConfig:
    mode: str | None = None  # None: socratic first, direct after a retry
    level: str = levels.BEGINNER
    sandbox: SandboxConfig = field(default_factory=SandboxConfig)
    provider: ProviderSettings | None = None
    store_path: str = "tutor_sessions.db"
    salt: str | None = None
    retention_days: int = DEFAULT_RETENTION_DAYS
    purge_interval_s: int = 3_600
    denylist_path: str | None = None  # None: bundled registry


def _sandbox_from(data: dict, base: SandboxConfig) -> SandboxConfig:
    keys = (
        "cpu_quota",
        "memory_limit_bytes",
        "wall_timeout_ms",
        "backend",
        "pool_size",
        "wait_when_busy",
        "grace_ms",
        "harness_path",
        "container_image",
        "container_harness_path",
    )
    merged = {k: data[k] for k in keys if k in data}
    if not merged:
        return base
    current = {k: getattr(base, k) for k in keys}
    current.update(merged)
    return SandboxConfig(**current)


def load_config(path: str | Path | None = None, env: dict | None = None) -> AppConfig:
    env = os.environ if env is None else env
    config = AppConfig()

    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        config.mode = data.get("mode", config.mode)
        config.level = data.get("level", config.level)
        config.store_path = data.get("store_path", config.store_path)
        config.salt = data.get("salt", config.salt)
        config.retention_days = int(data.get("retention_days", config.retention_days))
        config.purge_interval_s = int(
            data.get("purge_interval_s", config.purge_interval_s)
        )
        config.denylist_path = data.get("denylist_path", config.denylist_path)
        config.sandbox = _sandbox_from(data.get("sandbox", {}), config.sandbox)
        if "provider" in data:
            config.provider = ProviderSettings(**data["provider"])

    sandbox_overrides = {}
    if env.get(ENV_SANDBOX):
        sandbox_overrides["backend"] = env[ENV_SANDBOX]
    if env.get(ENV_HARNESS):
        sandbox_overrides["harness_path"] = env[ENV_HARNESS]
    if sandbox_overrides:
        config.sandbox = _sandbox_from(sandbox_overrides, config.sandbox)
    if env.get(ENV_SALT):
        config.salt = env[ENV_SALT]
    if env.get(ENV_RETENTION):
        config.retention_days = int(env[ENV_RETENTION])
    if env.get(ENV_PROVIDER_URL):
        config.provider = ProviderSettings(
            url=env[ENV_PROVIDER_URL], api_key=env.get(ENV_PROVIDER_KEY)
        )
    return config
