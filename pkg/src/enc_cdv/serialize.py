"""JSON/CSV plumbing: rationals as "p/q" strings, canonical dumps, atomic writes."""
from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction

from .weights import Weight


def rat(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rat(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    text = str(text).strip()
    if not text or any(c in text for c in ".eE"):
        raise ValueError(f"not an exact rational literal: {text!r}")
    return Fraction(text)


def to_jsonable(obj):
    """Convert library values into JSON-ready structures (rationals become strings)."""
    if isinstance(obj, Fraction):
        return rat(obj)
    if isinstance(obj, Weight):
        return [rat(c) for c in obj.coords]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted((to_jsonable(v) for v in obj), key=lambda v: json.dumps(v))
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


def dumps(obj, indent=None) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=indent, separators=(",", ":") if indent is None else None)


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
