"""Serialization helpers shared by the command-line tools."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

SIGNIFICANT_DIGITS = 10


def clean(obj):
    """Round floats to 10 significant digits and map non-finite values to None."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{SIGNIFICANT_DIGITS}g}") if math.isfinite(obj) else None
    if isinstance(obj, Mapping):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return clean(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(clean(doc), indent=2, ensure_ascii=False) + "\n"


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def combined_digest(digests: Iterable[str]) -> str:
    return digest("\n".join(digests).encode())


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}" if math.isfinite(value) else ""
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(row.get(col)) for col in header])
    return buf.getvalue()
