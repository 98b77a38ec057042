"""Canonical JSON/CSV formatting shared by every file the package emits.

Floats are written with 17 significant digits so values round-trip
bit-exactly, and objects serialize in a fixed field order, which makes
repeated runs with the same seed produce byte-identical output files.
"""

from __future__ import annotations

import json
import math
from typing import Any


def format_float(x: float) -> str:
    """17-significant-digit decimal form of x; round-trips to the same bits."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == int(x) and abs(x) < 1e16:
        # Keep small whole floats readable; "2.0" round-trips just as well.
        return repr(x)
    return format(x, ".17g")


def dumps(obj: Any) -> str:
    """Serialize to JSON with canonical float formatting and insertion order."""
    return _write(obj)


def _write(obj: Any) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_write(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_write(v) for v in obj) + "]"
    # numpy scalars/arrays funnel through item()/tolist() before this point;
    # anything else is a bug in the caller.
    if hasattr(obj, "tolist"):
        return _write(obj.tolist())
    if hasattr(obj, "item"):
        return _write(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str) -> Any:
    return json.loads(text)
