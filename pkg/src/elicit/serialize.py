"""Canonical serialization helpers.

Every artifact the package writes goes through these so that a fixed seed
produces byte-identical files: floats are rounded to 10 significant
digits, keys are sorted, and separators are fixed.
"""

from __future__ import annotations

import json

import numpy as np

FLOAT_DIGITS = 10


def canonical_float(x: float) -> float:
    if x != x or x in (float("inf"), float("-inf")):
        return x
    return float(f"{x:.{FLOAT_DIGITS}g}")


def _canonicalize(obj):
    if isinstance(obj, dict):
        return {k: _canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonicalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonicalize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return canonical_float(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def canonical_json(obj, indent: int | None = None) -> str:
    return json.dumps(_canonicalize(obj), sort_keys=True, indent=indent,
                      separators=(",", ": ") if indent else (",", ":")) + "\n"


def fmt_float(x: float) -> str:
    return f"{canonical_float(x):.{FLOAT_DIGITS}g}"
