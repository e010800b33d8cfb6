"""Serialization of result records: NDJSON with 17 significant digits, or a flat CSV."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable

import numpy as np


def _scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def dumps(obj) -> str:
    """JSON text where every float is written with ``.17g`` (non-finite floats become null)."""
    obj = _scalar(obj)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_ndjson(records: Iterable[dict]) -> str:
    return "".join(dumps(r) + "\n" for r in records)


def to_csv(records: list[dict]) -> str:
    """Scalars become columns (union in first-seen order); nested values are embedded JSON."""
    columns: list[str] = []
    for r in records:
        for k in r:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        row = []
        for c in columns:
            v = _scalar(r.get(c))
            if v is None:
                row.append("")
            elif isinstance(v, float):
                row.append(format(v, ".17g"))
            elif isinstance(v, (dict, list, tuple)):
                row.append(dumps(v))
            else:
                row.append(v)
        writer.writerow(row)
    return buf.getvalue()
