from __future__ import annotations

import csv
import dataclasses
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import TextIO


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def _as_dict(row) -> dict:
    if dataclasses.is_dataclass(row):
        return dataclasses.asdict(row)
    return dict(row)


def emit_csv(rows: Iterable, path: str | Path | TextIO, columns: Sequence[str] | None = None) -> int:
    """Write ``rows`` (dataclasses or dicts) with a header; returns the row count.

    ``path`` may also be an open text stream. Columns default to the first
    row's keys; pass them explicitly to get a header for an empty stream.
    """
    it = iter(rows)
    first = next(it, None)
    if columns is None:
        if first is None:
            raise ValueError("columns are required for an empty row stream")
        columns = list(_as_dict(first))
    if hasattr(path, "write"):
        return _write(path, first, it, columns)
    with open(path, "w", newline="") as fh:
        return _write(fh, first, it, columns)


def _write(fh, first, rest, columns) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    if first is None:
        return 0
    count = 0
    for row in (first, *rest):
        d = _as_dict(row)
        w.writerow([format_value(d.get(c)) for c in columns])
        count += 1
    return count
