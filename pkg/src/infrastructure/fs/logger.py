from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping


def log_timestamp() -> str:
    return datetime.now().strftime('%Y-%m-%d %H:%M:%S')


@dataclass
class RunLogger:
    log_path: Path

    def write(self, message: str) -> None:
        line = f'[{log_timestamp()}] {message}'
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with self.log_path.open('a', encoding='utf-8') as handle:
            handle.write(line + '\n')

    def __call__(self, message: str) -> None:
        self.write(message)


def create_logger(log_dir: Path, run: Mapping[str, Any]) -> RunLogger:
    """New run log under ``log_dir`` with a header listing the run settings."""
    log_dir.mkdir(parents=True, exist_ok=True)
    name = datetime.now().strftime('run_%Y%m%d_%H%M%S.log')
    logger = RunLogger(log_path=log_dir / name)

    logger.write('=== pcircle run ===')
    for key, value in run.items():
        logger.write(f'{key}: {value}')
    logger.write('---')
    return logger
