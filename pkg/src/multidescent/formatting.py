"""Deterministic number and JSON rendering shared by the CSV writer and CLI.

Numbers are rendered with at least 12 significant digits, fixed-point for
moderate magnitudes (``1.000000000000``) and scientific otherwise
(``1.000000000000e-05``), so that output is byte-stable across runs and
round-trips through ``float`` without precision loss.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["format_number", "to_json"]


def format_number(x: float) -> str:
    """Render a float with 12-digit precision, choosing fixed or scientific form."""
    v = float(x)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0.0:
        return "0.000000000000"
    if 0.1 <= abs(v) < 1e15:
        return f"{v:.12f}"
    return f"{v:.12e}"


def _emit(obj, parts: list, indent: int) -> None:
    pad = "  " * indent
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        parts.append(format_number(v) if math.isfinite(v) else "null")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (key, val) in enumerate(obj.items()):
            parts.append(f"{pad}  {json.dumps(str(key))}: ")
            _emit(val, parts, indent + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, val in enumerate(seq):
            parts.append(pad + "  ")
            _emit(val, parts, indent + 1)
            parts.append(",\n" if i < len(seq) - 1 else "\n")
        parts.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj) -> str:
    """Serialize nested dicts/lists/scalars to JSON with 12-digit numbers.

    Unlike :func:`json.dumps`, floats go through :func:`format_number` so the
    byte output is reproducible and never leaks platform repr differences;
    non-finite floats become ``null``.
    """
    parts: list = []
    _emit(obj, parts, 0)
    return "".join(parts)
