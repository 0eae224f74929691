"""Configuration utilities for udisc."""

from __future__ import annotations

import copy
import dataclasses
from pathlib import Path
from typing import Any, Dict, Optional

import yaml


DEFAULTS: Dict[str, Any] = {
    "solver": {
        "tol": 1e-8,
        "max_iter": 500,
        "barrier_shrink": 0.2,
        "init_scale": 0.1,
        "line_search": {"alpha": 0.01, "beta": 0.5},
    },
    "numerics": {"psd_tol": 1e-9, "rank_tol": 1e-10},
    "table1": {"x_max": 5.0, "grid": 50},
    "scan": {"eta_grid": 99},
    "cli": {"workers": 1},
    "logging": {"level": "INFO", "log_dir": None},
}


@dataclasses.dataclass
class AppConfig:
    raw: Dict[str, Any]

    def get(self, dotted_path: str, default: Optional[Any] = None) -> Any:
        node: Any = self.raw
        for part in dotted_path.split("."):
            if isinstance(node, dict) and part in node:
                node = node[part]
            else:
                return default
        return node


def load_config(
    path: Optional[str | Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> AppConfig:
    """Built-in defaults, then the YAML file at ``path``, then dotted ``overrides``.

    Environment variables are never consulted; numerical settings must be
    explicit in a file or on the command line.
    """
    data = copy.deepcopy(DEFAULTS)
    if path is not None:
        cfg_path = Path(path).expanduser().resolve()
        if not cfg_path.exists():
            raise FileNotFoundError(f"Config file not found: {cfg_path}")
        with cfg_path.open("r", encoding="utf-8") as handle:
            loaded = yaml.safe_load(handle) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"Config file must contain a mapping: {cfg_path}")
        _merge(data, loaded)

    if overrides:
        for dotted, value in overrides.items():
            if value is not None:
                _assign(data, dotted, value)

    return AppConfig(raw=data)


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> None:
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value


def _assign(tree: Dict[str, Any], dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node = tree
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
