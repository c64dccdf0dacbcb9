"""Deterministic JSON writing.

Floats are printed with 17 significant digits so every float64 round-trips
exactly; key order is insertion order, so identical inputs give identical
bytes.  json.load is fine for reading.
"""

import json

import numpy as np


def _render(obj, indent, level):
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not np.isfinite(value):
            raise ValueError(f"cannot serialize non-finite float {value}")
        text = format(value, ".17g")
        # make sure the token stays a JSON float, not an int
        if "e" not in text and "." not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [_render(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key, value in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {key!r}")
            items.append(
                inner + json.dumps(key) + ": " + _render(value, indent, level + 1)
            )
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps(obj, indent=2):
    """Serialize obj to a JSON string with full float precision."""
    return _render(obj, indent, 0) + "\n"


def dump(obj, path, indent=2):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, indent=indent))


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
