"""Deterministic JSON emission with full-precision floats.

The stock json module renders floats with repr (shortest round-trip),
which is lossless but not width-stable across values.  File artifacts
here promise 17 significant digits, which also round-trips doubles
exactly, so this small emitter handles the handful of JSON shapes the
package writes: dicts, lists, strings, numbers, booleans, None.
Insertion order of dict keys is preserved.
"""

from __future__ import annotations

import math

import numpy as np


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


def dump_json(obj, indent: int = 2) -> str:
    pieces: list[str] = []
    _emit(obj, pieces, indent, 0)
    return "".join(pieces)


def _emit(obj, out: list[str], indent: int, level: int) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        pad = " " * (indent * (level + 1))
        out.append("{\n")
        for i, (key, val) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON keys must be strings, got {type(key).__name__}")
            out.append(pad)
            out.append(_escape(key))
            out.append(": ")
            _emit(val, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(" " * (indent * level) + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            out.append("[]")
            return
        # Flat numeric rows stay on one line; anything nested goes multiline.
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            out.append("[")
            for i, val in enumerate(seq):
                _emit(val, out, indent, level + 1)
                if i < len(seq) - 1:
                    out.append(", ")
            out.append("]")
            return
        pad = " " * (indent * (level + 1))
        out.append("[\n")
        for i, val in enumerate(seq):
            out.append(pad)
            _emit(val, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(" " * (indent * level) + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


_ESCAPES = {
    '"': '\\"',
    "\\": "\\\\",
    "\b": "\\b",
    "\f": "\\f",
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)
