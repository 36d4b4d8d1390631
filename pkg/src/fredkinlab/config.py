"""Runtime configuration: built-in defaults, optional config file, CLI flags.

Precedence: command-line flags > the JSON file named by the
``PHOTONIC_LAB_CONFIG`` environment variable > the defaults below.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

ENV_VAR = "PHOTONIC_LAB_CONFIG"


@dataclass
class LabConfig:
    verify_tolerance: float = 1e-9
    optimizer_restarts: int = 32
    optimizer_penalty: float = 1e3
    optimizer_seed: int = 0
    sweep_seed: int = 20260811


def load_config(path: str | None = None) -> LabConfig:
    """Defaults overlaid with the config file, if one is configured."""
    cfg = LabConfig()
    path = path if path is not None else os.environ.get(ENV_VAR)
    if not path:
        return cfg
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    known = {f.name: f.type for f in fields(LabConfig)}
    for key, value in data.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r} in {path}")
        setattr(cfg, key, type(getattr(cfg, key))(value))
    return cfg
