"""Metadata records as canonical JSON (fixed key order, RFC-3339 UTC)."""

from __future__ import annotations

from typing import Any

from ..errors import ParseError
from ..model import (
    DownloadPolicy,
    MetadataLinks,
    MetadataRecord,
    format_timestamp,
    parse_timestamp,
    validate,
)
from .common import canonical_json_bytes, load_json, ref_from_json, ref_to_json

METADATA_FORMAT = "metadata/1"


def metadata_document(record: MetadataRecord) -> dict[str, Any]:
    return {
        "format": METADATA_FORMAT,
        "ref": ref_to_json(record.ref),
        "title": dict(sorted(record.title.items())),
        "description": dict(sorted(record.description.items())),
        "categories": list(record.categories),
        "license": record.license,
        "issued_at": format_timestamp(record.issued_at),
        "publisher": record.publisher,
        "download_policy": record.download_policy.value,
        "links": {
            "composed_of": [ref_to_json(r) for r in record.links.composed_of],
            "uses_language": [ref_to_json(r) for r in record.links.uses_language],
            "derived_from": [ref_to_json(r) for r in record.links.derived_from],
        },
        "content_hash": record.content_hash,
    }


def serialize_metadata(record: MetadataRecord) -> bytes:
    validate(record).raise_if_failed()
    return canonical_json_bytes(metadata_document(record))


def metadata_from_document(obj: Any, location: str = "") -> MetadataRecord:
    if not isinstance(obj, dict):
        raise ParseError("metadata document must be an object", location)
    if obj.get("format") != METADATA_FORMAT:
        raise ParseError(f"unsupported metadata format {obj.get('format')!r}", location)
    try:
        links_obj = obj.get("links", {})
        record = MetadataRecord(
            ref=ref_from_json(obj["ref"], location),
            title=dict(obj["title"]),
            description=dict(obj["description"]),
            categories=tuple(obj.get("categories", [])),
            license=obj["license"],
            issued_at=parse_timestamp(obj["issued_at"]),
            publisher=obj["publisher"],
            download_policy=DownloadPolicy(obj["download_policy"]),
            links=MetadataLinks(
                composed_of=tuple(ref_from_json(r, location) for r in links_obj.get("composed_of", [])),
                uses_language=tuple(ref_from_json(r, location) for r in links_obj.get("uses_language", [])),
                derived_from=tuple(ref_from_json(r, location) for r in links_obj.get("derived_from", [])),
            ),
            content_hash=obj.get("content_hash", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed metadata document: {exc!r}", location) from exc
    validate(record).raise_if_failed()
    return record


def parse_metadata(data: bytes, location: str = "") -> MetadataRecord:
    return metadata_from_document(load_json(data, location), location)
