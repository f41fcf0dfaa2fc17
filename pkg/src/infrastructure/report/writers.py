"""Machine-readable output: CSV through pandas, JSON through the json module.

CSV numbers carry 17 significant digits; JSON floats use repr, which is the
shortest string that parses back to the same double.  NaN and infinities have
no JSON spelling and become null.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from domain import ExponentFit, SweepRecord
from infrastructure.fs.atomic_write import atomic_write_text

SWEEP_COLUMNS = ('p', 'r', 'count', 'area', 'error')
CSV_FLOAT_FORMAT = '%.17g'


def to_payload(obj: Any) -> Any:
    """Plain JSON-ready structure: dataclasses become dicts, tuples become lists."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_payload(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_payload(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_payload(v) for v in obj]
    if isinstance(obj, complex):
        return {'real': to_payload(obj.real), 'imag': to_payload(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [to_payload(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def emit_json(obj: Any) -> str:
    return json.dumps(to_payload(obj), ensure_ascii=False, indent=2, allow_nan=False) + '\n'


def _frame_to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    return buffer.getvalue()


def emit_sweep_csv(records: Sequence[SweepRecord], fit: ExponentFit | None = None) -> str:
    """Header ``p,r,count,area,error``, one row per radius, then an optional fit line.

    The fit summary is a ``#`` comment line so CSV readers can skip it.
    """
    frame = pd.DataFrame([dataclasses.astuple(rec) for rec in records], columns=list(SWEEP_COLUMNS))
    frame['count'] = frame['count'].astype('int64')
    text = _frame_to_csv(frame)
    if fit is not None:
        parts = [f'{name}={_format_number(value)}' for name, value in dataclasses.asdict(fit).items()]
        text += '# fit: ' + ', '.join(parts) + '\n'
    return text


def emit_rows_csv(rows: Iterable[Mapping[str, Any]]) -> str:
    frame = pd.DataFrame([dict(to_payload(row)) for row in rows])
    return _frame_to_csv(frame)


def _format_number(value: Any) -> str:
    if isinstance(value, float):
        return 'nan' if math.isnan(value) else f'{value:.17g}'
    return str(value)


def write_output(text: str, output_path: Path | None, stream) -> None:
    """To ``output_path`` atomically, or to ``stream`` when no path is given."""
    if output_path is None:
        stream.write(text)
        stream.flush()
        return
    atomic_write_text(output_path, text)
