"""Deterministic JSON encoding.

API responses and exported model documents must be byte-identical for
identical inputs, so floats are always rendered with 17 significant digits
(enough for float64 values to round-trip exactly) and field order follows
construction order. NaN becomes null.
"""

from __future__ import annotations

import json
import math
from typing import Any


def format_float(value: float) -> str:
    if math.isnan(value):
        return "null"
    if math.isinf(value):
        raise ValueError("infinite values are not JSON-serializable")
    if value == int(value) and abs(value) < 1e16:
        return f"{value:.1f}"
    return format(value, ".17g")


def dumps(obj: Any) -> str:
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def dump_bytes(obj: Any) -> bytes:
    return dumps(obj).encode("utf-8")


def loads(text: str | bytes) -> Any:
    return json.loads(text)


def _write(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for key, value in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, value in enumerate(obj):
            if i:
                out.append(",")
            _write(value, out)
        out.append("]")
    else:
        try:
            import numpy as np
        except ImportError:  # pragma: no cover
            raise TypeError(f"cannot serialize {type(obj)!r}")
        if isinstance(obj, np.integer):
            out.append(str(int(obj)))
        elif isinstance(obj, np.floating):
            out.append(format_float(float(obj)))
        elif isinstance(obj, np.bool_):
            out.append("true" if obj else "false")
        elif isinstance(obj, np.ndarray):
            _write(obj.tolist(), out)
        else:
            raise TypeError(f"cannot serialize {type(obj)!r}")
