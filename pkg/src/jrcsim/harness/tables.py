"""Typed result tables with byte-stable CSV / JSON-lines serialisation.

Floats are written with 12 significant digits, lines end in LF, output is
pure ASCII.  A file written by :func:`emit` and read back by :func:`load`
re-emits byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

_TYPES = {"int": int, "float": float, "str": str, "bool": bool}


@dataclass(frozen=True)
class Column:
    name: str
    type: str = "float"
    unit: str = "-"

    def __post_init__(self):
        if self.type not in _TYPES:
            raise ValueError(f"column {self.name}: unknown type {self.type!r}")
        for text in (self.name, self.unit):
            if not text.isascii() or any(c in text for c in ",:\n\r\""):
                raise ValueError(f"column spec {text!r} must be ASCII without ',:\"' or newlines")


@dataclass
class ResultTable:
    name: str
    columns: tuple[Column, ...]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.rows = [self._coerce(r) for r in self.rows]

    def _coerce(self, row: Sequence) -> tuple:
        if len(row) != len(self.columns):
            raise ValueError(f"{self.name}: row has {len(row)} values, schema has {len(self.columns)}")
        out = []
        for col, value in zip(self.columns, row):
            kind = _TYPES[col.type]
            if kind is float:
                value = float(value)
            elif kind is int:
                if isinstance(value, float) and not value.is_integer():
                    raise ValueError(f"{self.name}.{col.name}: {value} is not an integer")
                value = int(value)
            elif kind is bool:
                value = bool(value)
            else:
                value = str(value)
                if not value.isascii() or any(c in value for c in ",\n\r\""):
                    raise ValueError(f"{self.name}.{col.name}: unsafe string {value!r}")
            out.append(value)
        return tuple(out)

    def add(self, *row):
        self.rows.append(self._coerce(row))

    def column(self, name: str) -> list:
        i = [c.name for c in self.columns].index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict]:
        names = [c.name for c in self.columns]
        return [dict(zip(names, r)) for r in self.rows]


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    text = f"{x:.12g}"
    return "0" if text == "-0" else text


def _cell(value, col: Column) -> str:
    if col.type == "float":
        return format_float(value)
    if col.type == "bool":
        return "true" if value else "false"
    return str(value)


def _json_cell(value, col: Column) -> str:
    if col.type == "float":
        text = format_float(value)
        return f'"{text}"' if text in ("nan", "inf", "-inf") else text
    if col.type == "bool":
        return "true" if value else "false"
    if col.type == "int":
        return str(value)
    return json.dumps(value)


def _schema(table: ResultTable) -> str:
    return ",".join(f"{c.name}:{c.type}:{c.unit}" for c in table.columns)


def _stable_metadata(table: ResultTable) -> dict:
    # runtime varies between runs and never reaches a file
    return {k: table.metadata[k] for k in sorted(table.metadata) if k != "runtime_s"}


def render(table: ResultTable, fmt: str = "csv") -> str:
    meta = _stable_metadata(table)
    if fmt == "csv":
        lines = [f"# table: {table.name}"]
        lines += [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
        lines.append(f"# schema: {_schema(table)}")
        lines.append(",".join(c.name for c in table.columns))
        lines += [",".join(_cell(v, c) for v, c in zip(r, table.columns)) for r in table.rows]
    elif fmt in ("jsonl", "json-lines"):
        header = {"table": table.name, "metadata": meta,
                  "schema": [[c.name, c.type, c.unit] for c in table.columns]}
        lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
        for r in table.rows:
            cells = ",".join(f"{json.dumps(c.name)}:{_json_cell(v, c)}" for v, c in zip(r, table.columns))
            lines.append("{" + cells + "}")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    text = "\n".join(lines) + "\n"
    if not text.isascii():
        raise ValueError(f"{table.name}: output is not ASCII")
    return text


def emit(table: ResultTable, path: str | Path, fmt: str = "csv") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(render(table, fmt))
    return path


def _parse(text: str, col: Column):
    if col.type == "float":
        return float(text)
    if col.type == "int":
        return int(text)
    if col.type == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"bad bool {text!r} in column {col.name}")
        return text == "true"
    return text


def _columns(spec: Iterable[Sequence[str]]) -> tuple[Column, ...]:
    return tuple(Column(name, kind, unit) for name, kind, unit in spec)


def load(path: str | Path) -> ResultTable:
    text = Path(path).read_text(encoding="ascii")
    lines = text.split("\n")[:-1] if text.endswith("\n") else text.split("\n")
    if lines and lines[0].startswith("{"):
        header = json.loads(lines[0])
        cols = _columns(header["schema"])
        rows = []
        for line in lines[1:]:
            rec = json.loads(line)
            rows.append(tuple(_parse(str(rec[c.name]).lower() if c.type == "bool" else str(rec[c.name]), c)
                              for c in cols))
        return ResultTable(header["table"], cols, rows, dict(header["metadata"]))

    meta, name, cols = {}, "", None
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            if key == "table":
                name = value
            elif key == "schema":
                cols = _columns(part.split(":") for part in value.split(","))
            else:
                meta[key] = json.loads(value)
        else:
            body.append(line)
    if cols is None:
        raise ValueError(f"{path}: missing schema header")
    rows = [tuple(_parse(v, c) for v, c in zip(line.split(","), cols)) for line in body[1:]]
    return ResultTable(name, cols, rows, meta)
