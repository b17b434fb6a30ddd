"""Result tables and their CSV / JSON serialization.

CSV output starts with optional ``# key=value`` metadata lines, then a
header row, then one line per row.  Floats are written with 17
significant digits so they parse back bit-for-bit.  JSON output is an
object with ``meta``, ``columns`` and ``rows`` (array of arrays); NaN
cells become ``null`` so the output stays strict JSON.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def append(self, row) -> None:
        row = list(row)
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")
        self.rows.append(row)

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.meta.items():
        buf.write(f"# {key}={value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json_cell(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def to_json(table: ResultTable) -> str:
    rows = [[_json_cell(v) for v in row] for row in table.rows]
    doc = {"meta": table.meta, "columns": table.columns, "rows": rows}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def emit(table: ResultTable, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        return to_csv(table).encode()
    if fmt == "json":
        return to_json(table).encode()
    raise ValueError(f"unknown format {fmt!r}")


def _parse_cell(text: str):
    if text == "-0":
        return -0.0
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_csv(data: str | bytes) -> ResultTable:
    if isinstance(data, bytes):
        data = data.decode()
    meta = {}
    lines = data.splitlines()
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition("=")
        meta[key] = value
    else:
        body_start = len(lines)
    reader = csv.reader(lines[body_start:])
    header = next(reader, [])
    table = ResultTable(columns=header, meta=meta)
    for row in reader:
        table.append([_parse_cell(c) for c in row])
    return table


def parse_json(data: str | bytes) -> ResultTable:
    doc = json.loads(data)
    rows = [[math.nan if v is None else v for v in row] for row in doc["rows"]]
    return ResultTable(columns=doc["columns"], rows=rows, meta=doc["meta"])
