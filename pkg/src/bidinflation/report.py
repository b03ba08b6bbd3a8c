"""Serialisation helpers: 12 significant digits for machines, 6 for people."""

from __future__ import annotations

import csv
import io
import json
import math

MACHINE_DIGITS = 12
HUMAN_DIGITS = 6
FORMATS = ("csv", "json", "markdown")


def fmt_machine(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, float)):
        return f"{x:.{MACHINE_DIGITS}g}"
    return str(x)


def fmt_human(x) -> str:
    if isinstance(x, float):
        return f"{x:.{HUMAN_DIGITS}g}"
    return fmt_machine(x)


def _round(obj):
    """Round floats to 12 significant digits so JSON output is stable and compact."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(f"{obj:.{MACHINE_DIGITS}g}")
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _round(obj.item())
    return obj


def to_json(obj) -> str:
    return json.dumps(_round(obj), sort_keys=True, indent=2) + "\n"


def to_jsonl(records) -> str:
    return "".join(json.dumps(_round(r), sort_keys=True) + "\n" for r in records)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_machine(x) for x in row])
    return buf.getvalue()


def to_markdown(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        lines.append("| " + " | ".join(fmt_human(x) for x in row) + " |")
    return "\n".join(lines) + "\n"


def render_table(header, rows, fmt: str, extra: dict | None = None) -> str:
    """Render a table as csv / markdown, or as JSON records merged into ``extra``."""
    rows = [list(r) for r in rows]
    if fmt == "csv":
        return to_csv(header, rows)
    if fmt == "markdown":
        return to_markdown(header, rows)
    if fmt == "json":
        doc = dict(extra or {})
        doc["rows"] = [dict(zip(header, r)) for r in rows]
        return to_json(doc)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
