import csv
import io
import json
import math
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, List, Sequence

from pydantic import BaseModel


def format_float(x: float) -> str:
    """Shortest round-trip decimal, never more than 17 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Decimal):
        return str(obj)
    if isinstance(obj, complex):
        return [_Float(obj.real), _Float(obj.imag)]
    if isinstance(obj, float):
        return _Float(obj)
    # numpy and mpmath scalars
    if hasattr(obj, "__float__"):
        return _Float(float(obj))
    if hasattr(obj, "__int__"):
        return int(obj)
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


class _Float(float):
    """Float marker so the encoder can emit fixed-format digits."""


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, compact separators, fixed float format."""
    return _render(to_jsonable(obj))


def _render(o: Any) -> str:
    if isinstance(o, _Float):
        text = format_float(o)
        return text if text not in ("nan", "inf", "-inf") else json.dumps(text)
    if isinstance(o, dict):
        items = sorted(o.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_render(v)}" for k, v in items) + "}"
    if isinstance(o, list):
        return "[" + ",".join(_render(v) for v in o) + "]"
    return json.dumps(o)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, Enum):
        return str(v.value)
    if v is None:
        return ""
    return str(v)


def record_rows(records: Sequence[BaseModel], columns: List[str]) -> List[List[Any]]:
    return [[getattr(r, c) for c in columns] for r in records]
