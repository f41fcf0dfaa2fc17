from __future__ import annotations

import os
import tempfile
from pathlib import Path


def ensure_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def atomic_move(temp_path: Path, dest_path: Path) -> None:
    ensure_dir(dest_path.parent)
    temp_path.replace(dest_path)


def atomic_write_text(dest_path: Path, text: str) -> None:
    """Write through a temporary sibling so readers never see a partial report."""
    ensure_dir(dest_path.parent)
    fd, name = tempfile.mkstemp(prefix=f'.{dest_path.name}.', suffix='.part', dir=dest_path.parent)
    temp_path = Path(name)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
        atomic_move(temp_path, dest_path)
    except BaseException:
        temp_path.unlink(missing_ok=True)
        raise
