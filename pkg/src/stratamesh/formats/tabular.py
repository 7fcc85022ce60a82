"""Canonical serialization of standardised datasets.

A dataset serializes to one multi-part bundle: a JSON schema descriptor
part followed by one RFC-4180 CSV part per table (tables sorted by name,
rows in the canonical order the model maintains). Null cells are bare
empty fields; empty strings are quoted.
"""

from __future__ import annotations

from typing import Any

from ..errors import ParseError
from ..model import (
    Column,
    Datatype,
    DatasetRef,
    Role,
    StandardisedDataset,
    Table,
    cell_from_text,
    cell_text,
    validate,
)
from . import delimited
from .bundle import read_bundle, write_bundle
from .common import canonical_json_bytes, load_json, ref_from_json, ref_to_json

SCHEMA_FORMAT = "tables/1"


def schema_descriptor(dataset: StandardisedDataset) -> dict[str, Any]:
    tables = []
    for table in dataset.tables:
        columns = []
        for col in table.columns:
            entry: dict[str, Any] = {
                "attribute": col.attribute,
                "datatype": col.datatype.value,
                "role": col.role.value,
            }
            if col.target is not None:
                entry["target"] = col.target
            columns.append(entry)
        tables.append({"name": table.name, "columns": columns})
    return {"format": SCHEMA_FORMAT, "ref": ref_to_json(dataset.ref), "tables": tables}


def _table_csv(table: Table) -> bytes:
    lines = [delimited.write_row([c.attribute for c in table.columns])]
    for row in table.rows:
        lines.append(
            delimited.write_row(
                [None if v is None else cell_text(v, c.datatype) for c, v in zip(table.columns, row)]
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def part_name(ref: DatasetRef, suffix: str) -> str:
    return f"{ref.local_id}.v{ref.version}.{suffix}"


def serialize_standardised(dataset: StandardisedDataset) -> bytes:
    """Canonical bundle bytes; validation failures raise before any byte
    is produced.
    """
    validate(dataset).raise_if_failed()
    parts = [(part_name(dataset.ref, "schema.json"), canonical_json_bytes(schema_descriptor(dataset)))]
    for table in dataset.tables:
        parts.append((part_name(dataset.ref, f"{table.name}.csv"), _table_csv(table)))
    return write_bundle(parts)


def _columns_from_schema(spec: Any, location: str) -> list[Column]:
    columns = []
    for entry in spec:
        try:
            columns.append(
                Column(
                    attribute=entry["attribute"],
                    datatype=Datatype(entry["datatype"]),
                    role=Role(entry.get("role", "plain")),
                    target=entry.get("target"),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed column spec: {exc!r}", location) from exc
    return columns


def _parse_table(name: str, columns: list[Column], payload: bytes, location: str) -> Table:
    rows = delimited.parse_rows(payload.decode("utf-8"), location)
    if not rows:
        raise ParseError(f"table {name!r}: missing header row", location)
    header = [c if c is not None else "" for c in rows[0]]
    expected = [c.attribute for c in columns]
    for attr in header:
        if attr not in expected:
            raise ParseError(f"table {name!r}: unknown column {attr!r}", location)
    if header != expected:
        raise ParseError(f"table {name!r}: header {header!r} does not match schema {expected!r}", location)
    parsed = []
    for i, raw in enumerate(rows[1:]):
        if len(raw) != len(columns):
            raise ParseError(f"table {name!r} row {i + 1}: {len(raw)} cells, expected {len(columns)}", location)
        cells = []
        for col, text in zip(columns, raw):
            if text is None:
                cells.append(None)
                continue
            try:
                cells.append(cell_from_text(text, col.datatype))
            except ValueError as exc:
                raise ParseError(f"table {name!r} row {i + 1} column {col.attribute!r}: {exc}", location) from exc
        parsed.append(tuple(cells))
    return Table(name=name, columns=tuple(columns), rows=tuple(parsed))


def parse_standardised(data: bytes, location: str = "") -> StandardisedDataset:
    parts = dict(read_bundle(data, location))
    schema_parts = [n for n in parts if n.endswith(".schema.json")]
    if len(schema_parts) != 1:
        raise ParseError("bundle must contain exactly one schema descriptor", location)
    schema = load_json(parts[schema_parts[0]], location)
    if schema.get("format") != SCHEMA_FORMAT:
        raise ParseError(f"unsupported schema format {schema.get('format')!r}", location)
    ref = ref_from_json(schema.get("ref"), location)

    tables = []
    seen = {schema_parts[0]}
    for spec in schema.get("tables", []):
        name = spec.get("name")
        pname = part_name(ref, f"{name}.csv")
        if pname not in parts:
            raise ParseError(f"bundle is missing table part {pname!r}", location)
        seen.add(pname)
        columns = _columns_from_schema(spec.get("columns", []), location)
        tables.append(_parse_table(name, columns, parts[pname], location))
    stray = set(parts) - seen
    if stray:
        raise ParseError(f"bundle carries undeclared parts: {sorted(stray)}", location)
    return StandardisedDataset(ref=ref, tables=tuple(tables))
