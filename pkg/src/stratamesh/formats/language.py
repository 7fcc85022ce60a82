"""Canonical delimited-text form of language datasets.

One row per lexicalization, sorted by (concept_id, language_tag), after a
comment line carrying the dataset ref::

    # ref: unitn/uni-lang/v1
    concept_id,language_tag,lemma,gloss
"""

from __future__ import annotations

from ..errors import ParseError
from ..model import Concept, ContentKind, LanguageDataset, Lexicalization, validate
from . import delimited
from .common import ref_from_slug, ref_slug

HEADER = ("concept_id", "language_tag", "lemma", "gloss")


def serialize_language(dataset: LanguageDataset) -> bytes:
    validate(dataset).raise_if_failed()
    lines = [f"# ref: {ref_slug(dataset.ref)}", delimited.write_row(HEADER)]
    for concept in dataset.concepts:
        for lex in concept.lexicalizations:
            lines.append(
                delimited.write_row((concept.concept_id, lex.language_tag, lex.lemma, lex.gloss))
            )
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_language(data: bytes, location: str = "") -> LanguageDataset:
    text = data.decode("utf-8")
    first = text.split("\n", 1)[0].strip()
    if not first.startswith("# ref:"):
        raise ParseError("missing `# ref:` line", location)
    ref = ref_from_slug(first[len("# ref:"):], ContentKind.LANGUAGE, location)

    rows = delimited.parse_rows(text, location)
    if not rows or tuple(c or "" for c in rows[0]) != HEADER:
        raise ParseError(f"header must be {','.join(HEADER)}", location)
    by_concept: dict[str, list[Lexicalization]] = {}
    seen: set[tuple[str, str]] = set()
    for i, row in enumerate(rows[1:]):
        if len(row) != 4 or any(cell is None for cell in row):
            raise ParseError(f"row {i + 1}: expected 4 non-null fields", location)
        concept_id, tag, lemma, gloss = row  # type: ignore[misc]
        if (concept_id, tag) in seen:
            raise ParseError(f"row {i + 1}: duplicate ({concept_id}, {tag})", location)
        seen.add((concept_id, tag))
        if not gloss.strip():
            raise ParseError(f"row {i + 1}: empty gloss for {concept_id!r}", location)
        by_concept.setdefault(concept_id, []).append(
            Lexicalization(lemma=lemma, language_tag=tag, gloss=gloss)
        )
    concepts = tuple(
        Concept(concept_id=cid, lexicalizations=tuple(lex)) for cid, lex in by_concept.items()
    )
    return LanguageDataset(ref=ref, concepts=concepts)
