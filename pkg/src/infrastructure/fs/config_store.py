from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from domain import DEFAULT_TOLERANCES, Tolerances

DEFAULT_CONFIG = {
    'language': 'en',
    'log_dir': 'pcircle_logs',
    'threads': 1,
    'tolerances': {},
}


def config_path(app_root: Path) -> Path:
    return app_root / 'config.json'


def load_config(app_root: Path) -> dict[str, Any]:
    path = config_path(app_root)
    if not path.exists():
        return DEFAULT_CONFIG.copy()
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except Exception:
        return DEFAULT_CONFIG.copy()
    if not isinstance(data, dict):
        return DEFAULT_CONFIG.copy()
    cfg = DEFAULT_CONFIG.copy()
    cfg.update({k: v for k, v in data.items() if k in cfg})
    return cfg


def tolerances_from_config(cfg: dict[str, Any], base: Tolerances = DEFAULT_TOLERANCES) -> Tolerances:
    """Tolerances with the config overrides applied; unknown or malformed keys are ignored."""
    overrides = cfg.get('tolerances') or {}
    if not isinstance(overrides, dict):
        return base
    clean: dict[str, Any] = {}
    for key, value in overrides.items():
        try:
            clean[key] = float(value)
        except (TypeError, ValueError):
            continue
    return base.merged(clean)
