"""Deterministic JSON emission for every report record.

Keys are sorted, separators are compact, integers are exact, and reals use
17 significant digits so that ``emit(parse(emit(x))) == emit(x)`` byte for
byte. Rationals are written as ``"p/q"`` strings and terms in prefix text.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from fractions import Fraction
from typing import Any

from .terms import Symbol, Term, format_term


def to_plain(value: Any) -> Any:
    """Reduce a report value to JSON-native types (floats kept as floats)."""
    if value is None or isinstance(value, (bool, str, int, float)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Term):
        return format_term(value)
    if isinstance(value, Symbol):
        return value.name
    if isinstance(value, enum.Enum):
        return value.value
    to_report = getattr(value, "to_report", None)
    if to_report is not None:
        return to_plain(to_report())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            key = to_plain(k)
            if not isinstance(key, str):
                key = str(key)
            out[key] = to_plain(v)
        return out
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted((to_plain(v) for v in value), key=lambda x: json.dumps(x, sort_keys=True))
    raise TypeError(f"cannot emit {type(value).__name__} in a report")


def _real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite real {x!r} cannot be emitted")
    return format(x, ".16e")


def _emit(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(int(value)))
    elif isinstance(value, float):
        out.append(_real(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, dict):
        out.append("{")
        for n, key in enumerate(sorted(value)):
            if n:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _emit(value[key], out)
        out.append("}")
    else:
        out.append("[")
        for n, item in enumerate(value):
            if n:
                out.append(",")
            _emit(item, out)
        out.append("]")


def emit_report(value: Any) -> str:
    out: list[str] = []
    _emit(to_plain(value), out)
    return "".join(out)


def parse_report(text: str) -> Any:
    return json.loads(text)
