"""Canonical RFC-4180 delimited text.

The stock csv module cannot tell a quoted empty field from a bare one, so
this writer/reader pair keeps that distinction: a bare empty field is a
null cell, ``""`` is the empty string.
"""

from __future__ import annotations

from ..errors import ParseError

_NEEDS_QUOTING = (",", '"', "\n", "\r")


def write_field(value: str | None) -> str:
    if value is None:
        return ""
    # leading `#` is quoted so a first-column value can never read back
    # as a comment line
    if value == "" or value.startswith("#") or any(ch in value for ch in _NEEDS_QUOTING):
        return '"' + value.replace('"', '""') + '"'
    return value


def write_row(cells: list[str | None] | tuple[str | None, ...]) -> str:
    return ",".join(write_field(c) for c in cells)


def parse_rows(text: str, location: str = "") -> list[list[str | None]]:
    """Parse delimited text into rows of cells; ``None`` marks bare empty
    fields. Accepts CRLF and a missing final newline; ``#``-prefixed lines
    outside quotes are skipped as comments.
    """
    rows: list[list[str | None]] = []
    row: list[str | None] = []
    fields = 0
    buf: list[str] = []
    quoted = False
    in_quotes = False
    line = 1
    at_line_start = True
    in_comment = False
    i = 0
    n = len(text)

    def end_field():
        nonlocal quoted, fields
        value = "".join(buf)
        row.append(value if (quoted or value) else None)
        buf.clear()
        quoted = False
        fields += 1

    def end_row():
        nonlocal fields
        if fields or buf or quoted:
            end_field()
            rows.append(list(row))
        row.clear()
        fields = 0

    while i < n:
        ch = text[i]
        if in_comment:
            if ch == "\n":
                in_comment = False
                line += 1
            i += 1
            continue
        if in_quotes:
            if ch == '"':
                if i + 1 < n and text[i + 1] == '"':
                    buf.append('"')
                    i += 2
                    continue
                in_quotes = False
                i += 1
                continue
            if ch == "\n":
                line += 1
            buf.append(ch)
            i += 1
            continue
        if at_line_start and ch == "#" and not buf and not row:
            in_comment = True
            i += 1
            continue
        at_line_start = False
        if ch == '"':
            if buf:
                raise ParseError(f"line {line}: quote inside unquoted field", location)
            in_quotes = True
            quoted = True
            i += 1
            continue
        if ch == ",":
            end_field()
            i += 1
            continue
        if ch == "\r":
            i += 1
            continue
        if ch == "\n":
            end_row()
            line += 1
            at_line_start = True
            i += 1
            continue
        buf.append(ch)
        i += 1
    if in_quotes:
        raise ParseError(f"line {line}: unterminated quoted field", location)
    end_row()
    return rows
