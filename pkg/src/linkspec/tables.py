"""Table serialization: CSV and versioned JSON.

Cells are ints, exact rationals ("p/q"), reals (12 significant digits) or
bare strings.  Parsing inverts the formatting, so emit-parse is idempotent:
a parsed table re-emits byte-identically.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

SCHEMA_VERSION = 1


@dataclass
class Table:
    columns: list
    rows: list
    name: str = ""

    def __eq__(self, other):
        return (
            isinstance(other, Table)
            and self.columns == other.columns
            and self.rows == other.rows
        )


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def parse_cell(text: str):
    text = text.strip()
    if text == "":
        return ""
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        try:
            return Fraction(text)
        except ValueError:
            pass
    try:
        return float(text)
    except ValueError:
        return text


def emit_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def emit_json(table: Table) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "name": table.name,
        "columns": list(table.columns),
        "rows": [[format_cell(v) for v in row] for row in table.rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit(table: Table, fmt: str, path: str | None = None) -> str:
    text = emit_csv(table) if fmt == "csv" else emit_json(table)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_csv(text: str, name: str = "") -> Table:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return Table(columns=[], rows=[], name=name)
    return Table(
        columns=rows[0],
        rows=[[parse_cell(c) for c in r] for r in rows[1:]],
        name=name,
    )


def parse_json(text: str) -> Table:
    payload = json.loads(text)
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported table schema version {payload.get('schema_version')!r}")
    return Table(
        columns=list(payload["columns"]),
        rows=[[parse_cell(c) for c in row] for row in payload["rows"]],
        name=payload.get("name", ""),
    )
