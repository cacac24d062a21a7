"""Canonical byte encoding used for every hashed or signed structure.

Objects are written with sorted keys, no insignificant whitespace, UTF-8 text
and Python's shortest round-trip float repr. ``decode(encode(x)) == x`` for any
JSON-compatible value without NaN/inf.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .errors import EncodingError


def _check_finite(value: Any) -> None:
    if isinstance(value, float):
        if not math.isfinite(value):
            raise EncodingError(f"non-finite number {value!r} cannot be encoded")
    elif isinstance(value, dict):
        for k, v in value.items():
            if not isinstance(k, str):
                raise EncodingError(f"object keys must be strings, got {k!r}")
            _check_finite(v)
    elif isinstance(value, (list, tuple)):
        for v in value:
            _check_finite(v)


def encode_value(value: Any) -> bytes:
    """Canonically encode a plain JSON-compatible value."""
    _check_finite(value)
    try:
        text = json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)
    except (TypeError, ValueError) as exc:
        raise EncodingError(str(exc)) from exc
    return text.encode("utf-8")


def decode_value(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return json.loads(data)
