"""Shared helpers for the JSON-backed formats."""

from __future__ import annotations

import json
from typing import Any

from ..errors import ParseError
from ..model import ContentKind, DatasetRef


def canonical_json_bytes(obj: Any) -> bytes:
    """UTF-8 JSON with two-space indent; key order is insertion order, so
    callers build dicts in the documented field order.
    """
    return (json.dumps(obj, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def load_json(data: bytes, location: str = "") -> Any:
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}", location) from exc


def ref_to_json(ref: DatasetRef) -> dict[str, Any]:
    return {
        "node_id": ref.node_id,
        "local_id": ref.local_id,
        "version": ref.version,
        "kind": ref.kind.value,
    }


def ref_from_json(obj: Any, location: str = "") -> DatasetRef:
    if not isinstance(obj, dict):
        raise ParseError(f"dataset ref must be an object, got {type(obj).__name__}", location)
    try:
        return DatasetRef(
            node_id=obj["node_id"],
            local_id=obj["local_id"],
            version=int(obj["version"]),
            kind=ContentKind(obj["kind"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"malformed dataset ref: {exc!r}", location) from exc


def ref_slug(ref: DatasetRef) -> str:
    return f"{ref.node_id}/{ref.local_id}/v{ref.version}"


def ref_from_slug(text: str, kind: ContentKind, location: str = "") -> DatasetRef:
    parts = text.strip().split("/")
    if len(parts) != 3 or not parts[2].startswith("v") or not parts[2][1:].isdigit():
        raise ParseError(f"malformed ref {text!r}", location)
    return DatasetRef(parts[0], parts[1], int(parts[2][1:]), kind)
