from __future__ import annotations

from pathlib import Path


def get_app_root() -> Path:
    """Project root: the parent of src/."""
    return Path(__file__).resolve().parents[3]


def get_src_root() -> Path:
    return Path(__file__).resolve().parents[2]


def resolve_in_app(path: str | Path) -> Path:
    """Relative paths from config.json are taken against the project root."""
    candidate = Path(path)
    return candidate if candidate.is_absolute() else get_app_root() / candidate


def resource_path(*candidates: str) -> Path:
    """First existing candidate under the project root or src/."""
    roots = [get_app_root(), get_src_root()]

    for root in roots:
        for rel in candidates:
            path = root / rel
            if path.exists():
                return path

    return get_app_root() / candidates[0]
