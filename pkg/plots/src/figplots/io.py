"""Readers for the experiment CSV tables.

The files are self-describing: a ``# <schema>`` comment on the first
line, a header row, data rows, comments anywhere, and a ``# end``
marker on the last line. Readers validate everything against the
declared schema and report the 1-based line number of the first
offending row, so a truncated or hand-edited file fails loudly instead
of rendering garbage. Inputs are only ever read.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import pandas as pd


class SchemaError(Exception):
    """An input table does not match the schema it declares."""

    def __init__(self, message: str, path, line: int | None = None):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


@dataclass(frozen=True)
class Column:
    name: str
    parse: type
    # pandas dtype; seeds are unsigned 64-bit so int64 would overflow
    dtype: str


@dataclass(frozen=True)
class TableSchema:
    """Declared layout of one CSV kind: tag line, columns, dtypes."""

    tag: str
    columns: tuple[Column, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)


RESULTS = TableSchema(
    "sparsemom-results-v1",
    (
        Column("sweep_param", str, "object"),
        Column("sweep_value", float, "float64"),
        Column("estimator", str, "object"),
        Column("trial", int, "int64"),
        Column("seed", int, "uint64"),
        Column("n", int, "int64"),
        Column("d", int, "int64"),
        Column("l2_error", float, "float64"),
        Column("linf_error", float, "float64"),
        Column("success_rate", float, "float64"),
        Column("support_size", int, "int64"),
    ),
)

TRACE = TableSchema(
    "sparsemom-trace-v1",
    (
        Column("method", str, "object"),
        Column("t", int, "int64"),
        Column("coordinate", int, "int64"),
        Column("value", float, "float64"),
        Column("beta", float, "float64"),
    ),
)

BENCH = TableSchema(
    "sparsemom-bench-v1",
    (
        Column("d", int, "int64"),
        Column("n", int, "int64"),
        Column("estimator", str, "object"),
        Column("wall_time_ms", float, "float64"),
    ),
)

SCHEMAS = {s.tag: s for s in (RESULTS, TRACE, BENCH)}

END_MARKER = "# end"


def load_table(path) -> tuple[TableSchema, pd.DataFrame]:
    """Parse and validate one table; returns its schema and a typed frame.

    Raises SchemaError on any deviation: unknown or missing schema line,
    header mismatch, wrong field count, unparsable value, or a missing
    end marker (the sign of a truncated file).
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read input: {exc.strerror or exc}", p) from None

    lines = text.splitlines()
    if not lines:
        raise SchemaError("empty file, expected a schema comment", p, line=1)
    first = lines[0].strip()
    if not first.startswith("#"):
        raise SchemaError("first line must be a '# <schema>' comment", p, line=1)
    tag = first.lstrip("#").strip()
    schema = SCHEMAS.get(tag)
    if schema is None:
        known = ", ".join(sorted(SCHEMAS))
        raise SchemaError(f"unknown schema {tag!r}, expected one of: {known}", p, line=1)
    if lines[-1].strip() != END_MARKER:
        raise SchemaError(
            f"missing {END_MARKER!r} marker, file looks truncated", p, line=len(lines)
        )

    names = schema.names
    header_seen = False
    values: list[list] = [[] for _ in names]
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        row = next(csv.reader([raw]))
        if not header_seen:
            if tuple(row) != names:
                raise SchemaError(
                    f"header {row!r} does not match schema {tag!r}", p, line=lineno
                )
            header_seen = True
            continue
        if len(row) != len(names):
            raise SchemaError(
                f"expected {len(names)} fields, got {len(row)}", p, line=lineno
            )
        for i, (col, field) in enumerate(zip(schema.columns, row)):
            try:
                values[i].append(col.parse(field))
            except ValueError:
                raise SchemaError(
                    f"column {col.name!r}: cannot parse {field!r}", p, line=lineno
                ) from None
    if not header_seen:
        raise SchemaError("no header row before the end marker", p, line=len(lines))

    frame = pd.DataFrame(
        {c.name: pd.Series(vals, dtype=c.dtype) for c, vals in zip(schema.columns, values)}
    )
    return schema, frame


def load_trace(path) -> pd.DataFrame:
    """load_table restricted to the trace schema."""
    schema, frame = load_table(path)
    if schema.tag != TRACE.tag:
        raise SchemaError(f"expected {TRACE.tag!r}, found {schema.tag!r}", path, line=1)
    return frame
