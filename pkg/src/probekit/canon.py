"""Canonical JSON serialization: sorted keys, fixed float formatting with 17
significant digits, no whitespace. Equal documents produce byte-equal text,
which is what snapshot hashing and replay-determinism checks rely on."""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} in canonical document")
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def canonical_json(value) -> str:
    if isinstance(value, dict):
        parts = []
        for key in sorted(value):
            if not isinstance(key, str):
                raise TypeError(f"canonical documents need string keys, got {key!r}")
            parts.append(f"{json.dumps(key)}:{canonical_json(value[key])}")
        return "{" + ",".join(parts) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in value) + "]"
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise TypeError(f"cannot canonicalize {type(value).__name__}")


def canonical_hash(value) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()
