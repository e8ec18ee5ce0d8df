"""Deterministic report serialization.

Reports must be byte-identical for identical configurations regardless of
worker count, so this module emits JSON itself: insertion-ordered keys,
floats at 17 significant digits, exact rationals as "p/q" strings.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def _emit(obj, out: list[str]) -> None:
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            raise ValueError("non-finite float in report")
        out.append(format(obj, ".17g"))
    elif isinstance(obj, Fraction):
        out.append(f'"{obj}"')
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(_escape(str(k)))
            out.append(":")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def _escape(s: str) -> str:
    body = (s.replace("\\", "\\\\").replace('"', '\\"')
             .replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r"))
    return f'"{body}"'


def to_json_text(obj) -> str:
    out: list[str] = []
    _emit(obj, out)
    return "".join(out) + "\n"


def rational_from_string(s: str) -> Fraction:
    return Fraction(s)


def csv_rows(header: list[str], rows: list[list]) -> str:
    def fmt(x):
        if isinstance(x, float):
            return format(x, ".17g")
        return str(x)

    lines = [",".join(header)]
    lines.extend(",".join(fmt(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"
