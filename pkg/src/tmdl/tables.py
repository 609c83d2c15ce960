"""Bit-stable CSV/JSON emission.

CSV files are UTF-8 with LF line endings, '.' decimals and floats printed
with 17 significant digits so a read-back reproduces every value exactly.
NaN cells serialize as "nan" and are reported for the metadata sidecar.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass
class CsvInfo:
    filename: str
    rows: int
    nan_cells: list        # [row, column-name] pairs


def format_value(x) -> str:
    if isinstance(x, (bool,)):
        return str(int(x))
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, str):
        return x
    xf = float(x)
    if xf != xf:
        return "nan"
    return format(xf, ".17g")


def emit_csv(columns: list[str], rows, path) -> CsvInfo:
    """Write a header + rows table; returns row count and NaN locations."""
    path = Path(path)
    nan_cells = []
    lines = [",".join(columns)]
    count = 0
    for r, row in enumerate(rows):
        if len(row) != len(columns):
            raise ValueError(f"row {r} has {len(row)} cells, expected {len(columns)}")
        cells = []
        for name, x in zip(columns, row):
            s = format_value(x)
            if s == "nan":
                nan_cells.append([r, name])
            cells.append(s)
        lines.append(",".join(cells))
        count += 1
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return CsvInfo(filename=path.name, rows=count, nan_cells=nan_cells)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Read back a table written by emit_csv (raw string cells)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln != ""]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def emit_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8", newline="\n")
