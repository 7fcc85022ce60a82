"""Length-prefixed multi-part container for datasets that serialize to
more than one logical file (per-table delimited text plus a schema
descriptor). Part payloads are arbitrary bytes; the envelope is text.

Layout::

    %bundle 1
    %part <name> <byte-length>
    <payload bytes>
    %part <name> <byte-length>
    <payload bytes>

A single newline follows each payload.
"""

from __future__ import annotations

from ..errors import ParseError

MAGIC = b"%bundle 1\n"


def write_bundle(parts: list[tuple[str, bytes]]) -> bytes:
    chunks = [MAGIC]
    for name, payload in parts:
        if any(ch.isspace() for ch in name) or not name:
            raise ValueError(f"bad part name: {name!r}")
        chunks.append(f"%part {name} {len(payload)}\n".encode("utf-8"))
        chunks.append(payload)
        chunks.append(b"\n")
    return b"".join(chunks)


def read_bundle(data: bytes, location: str = "") -> list[tuple[str, bytes]]:
    if not data.startswith(MAGIC):
        raise ParseError("missing bundle header", location)
    pos = len(MAGIC)
    parts: list[tuple[str, bytes]] = []
    while pos < len(data):
        eol = data.find(b"\n", pos)
        if eol < 0:
            raise ParseError("truncated part header", location)
        header = data[pos:eol].decode("utf-8", errors="replace")
        tokens = header.split(" ")
        if len(tokens) != 3 or tokens[0] != "%part" or not tokens[2].isdigit():
            raise ParseError(f"malformed part header: {header!r}", location)
        name, length = tokens[1], int(tokens[2])
        start = eol + 1
        end = start + length
        if end + 1 > len(data) or data[end:end + 1] != b"\n":
            raise ParseError(f"part {name!r} is truncated", location)
        parts.append((name, data[start:end]))
        pos = end + 1
    return parts
