"""CSV tables with ``#`` metadata headers and an exact float round trip."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

TABLE_FORMAT_VERSION = "1"


class TableError(ValueError):
    pass


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            raise TableError("NaN values are not written; use None for missing entries")
        return format(value, ".17g")
    return str(value)


def parse_value(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class SweepResult:
    """Rows of one task's output; ``columns`` names are a stable interface."""

    columns: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.rows = [tuple(r) for r in self.rows]
        self.metadata = {str(k): str(v) for k, v in self.metadata.items()}
        for r in self.rows:
            if len(r) != len(self.columns):
                raise TableError(f"row has {len(r)} fields, expected {len(self.columns)}")
            for v in r:
                if isinstance(v, float) and math.isnan(v):
                    raise TableError("NaN in table row")

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def records(self):
        return [dict(zip(self.columns, r)) for r in self.rows]


def write_table(path, table: SweepResult) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# format_version: {TABLE_FORMAT_VERSION}\n")
        for key, value in table.metadata.items():
            text = str(value).replace("\n", " ")
            fh.write(f"# {key}: {text}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])
    return path


def read_table(path) -> SweepResult:
    metadata = {}
    lines = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                metadata[key.strip()] = value.strip()
            else:
                lines.append(line)
    reader = csv.reader(lines)
    try:
        columns = next(reader)
    except StopIteration:
        raise TableError(f"{path}: no header row") from None
    rows = [tuple(parse_value(v) for v in r) for r in reader if r]
    metadata.pop("format_version", None)
    return SweepResult(tuple(columns), rows, metadata)
