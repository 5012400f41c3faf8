"""Canonical JSON serialization.

Every byte the platform publishes (snapshot files, API bodies, exports) goes
through this serializer so that equal documents are equal byte strings on any
run and platform: keys sorted, floats fixed at 6 decimal places, compact
separators, UTF-8.
"""

from __future__ import annotations

import json
import math
from typing import Any

FLOAT_DECIMALS = 6


def format_float(value: float) -> str:
    """Render a float at the canonical precision.

    Rejects NaN and infinities (not representable in JSON); collapses -0.0
    so sign noise never reaches the wire.
    """
    if math.isnan(value) or math.isinf(value):
        raise ValueError("non-finite float cannot be serialized canonically")
    text = f"{value:.{FLOAT_DECIMALS}f}"
    if text == "-0." + "0" * FLOAT_DECIMALS:
        text = text[1:]
    return text


def quantize(value: float) -> float:
    """Round to the canonical precision, so a value equals its parsed-back form."""
    if math.isnan(value) or math.isinf(value):
        raise ValueError("non-finite float cannot be quantized")
    q = round(value, FLOAT_DECIMALS)
    return 0.0 if q == 0.0 else q


def canonical_json(obj: Any) -> str:
    """Serialize to the canonical JSON text form."""
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def canonical_bytes(obj: Any) -> bytes:
    """Serialize to canonical UTF-8 bytes."""
    return canonical_json(obj).encode("utf-8")


def _write(obj: Any, parts: list[str]) -> None:
    if obj is None or obj is True or obj is False:
        parts.append(json.dumps(obj))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, bool):  # pragma: no cover - caught by identity checks above
        parts.append(json.dumps(obj))
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, dict):
        keys = list(obj.keys())
        if any(not isinstance(k, str) for k in keys):
            raise TypeError("canonical JSON objects require string keys")
        parts.append("{")
        for i, key in enumerate(sorted(keys)):
            if i:
                parts.append(",")
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(":")
            _write(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(",")
            _write(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot canonically serialize {type(obj).__name__}")
