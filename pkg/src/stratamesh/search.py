"""Deterministic metadata search shared by the HTTP API and the CLI.

Free text matches case-insensitive whole tokens against titles,
descriptions (every language version), and categories. Filters are
conjunctive; results are ranked by distinct matched tokens, then
local_id ascending, then version descending.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .model import ContentKind, MetadataRecord

MAX_PAGE_SIZE = 100
DEFAULT_PAGE_SIZE = 20

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class SearchQuery:
    text: Optional[str] = None
    kinds: frozenset[ContentKind] = frozenset()
    categories: frozenset[str] = frozenset()
    language_tag: Optional[str] = None
    page: int = 1
    page_size: int = DEFAULT_PAGE_SIZE

    def __post_init__(self):
        object.__setattr__(self, "kinds", frozenset(self.kinds))
        object.__setattr__(self, "categories", frozenset(self.categories))
        if self.page < 1:
            raise ValueError("page must be >= 1")
        if not 1 <= self.page_size <= MAX_PAGE_SIZE:
            raise ValueError(f"page_size must be between 1 and {MAX_PAGE_SIZE}")


@dataclass(frozen=True)
class SearchResults:
    records: tuple[MetadataRecord, ...]
    total: int
    page: int
    page_size: int


def _record_tokens(record: MetadataRecord) -> set[str]:
    tokens: set[str] = set()
    for text in (*record.title.values(), *record.description.values()):
        tokens.update(tokenize(text))
    for category in record.categories:
        tokens.update(tokenize(category))
    return tokens


def _matches(record: MetadataRecord, query: SearchQuery) -> Optional[int]:
    """Distinct matched token count, or None when a filter rejects."""
    if query.kinds and record.ref.kind not in query.kinds:
        return None
    if query.categories and not (query.categories & set(record.categories)):
        return None
    if query.language_tag is not None:
        if query.language_tag not in record.title and query.language_tag not in record.description:
            return None
    wanted = tokenize(query.text) if query.text else []
    if not wanted:
        return 0
    present = _record_tokens(record)
    hits = len({t for t in wanted if t in present})
    return hits if hits else None


def search(records: list[MetadataRecord], query: SearchQuery) -> SearchResults:
    scored = []
    for record in records:
        score = _matches(record, query)
        if score is not None:
            scored.append((score, record))
    scored.sort(key=lambda pair: (-pair[0], pair[1].ref.local_id, -pair[1].ref.version))
    ranked = [record for _, record in scored]
    start = (query.page - 1) * query.page_size
    return SearchResults(
        records=tuple(ranked[start:start + query.page_size]),
        total=len(ranked),
        page=query.page,
        page_size=query.page_size,
    )
