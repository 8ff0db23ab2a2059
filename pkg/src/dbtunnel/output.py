"""Locale-independent CSV / JSON emission."""
from __future__ import annotations

import json
import math


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(row.get(col)) for col in header))
    return "\n".join(lines) + "\n"


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def json_text(obj) -> str:
    def clean(o):
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return _json_value(o)
    return json.dumps(clean(obj), indent=2) + "\n"


def records_text(header, rows, fmt) -> str:
    if fmt == "json":
        return json_text([{col: row.get(col) for col in header} for row in rows])
    return csv_text(header, rows)
