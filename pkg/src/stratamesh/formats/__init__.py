"""Bit-exact parsers and serializers for the stratified content types.

Delimited text for standardised and language datasets, a Turtle/OWL subset
for knowledge and graph datasets, JSON for metadata. Serialization is
canonical: one fixed byte string per value.
"""

from __future__ import annotations

from ..model import (
    ContentKind,
    Dataset,
    DatasetRef,
    GraphDataset,
    KnowledgeDataset,
    LanguageDataset,
    StandardisedDataset,
)
from .graphttl import graph_triples, parse_graph, serialize_graph
from .language import parse_language, serialize_language
from .metadata import metadata_document, metadata_from_document, parse_metadata, serialize_metadata
from .ontology import knowledge_triples, parse_knowledge, serialize_knowledge
from .tabular import parse_standardised, schema_descriptor, serialize_standardised
from .turtle import (
    BlankNode,
    Iri,
    Literal,
    TurtleDocument,
    parse_turtle,
    serialize_turtle,
)

FILE_EXTENSIONS = {
    ContentKind.STANDARDISED: "bundle",
    ContentKind.LANGUAGE: "lang.csv",
    ContentKind.KNOWLEDGE: "onto.ttl",
    ContentKind.GRAPH: "graph.ttl",
    ContentKind.LOW_QUALITY: "dat",
    ContentKind.EXTERNAL_LANGUAGE: "dat",
    ContentKind.EXTERNAL_REFERENCE: "dat",
}

MEDIA_TYPES = {
    ContentKind.STANDARDISED: "text/plain; charset=utf-8",
    ContentKind.LANGUAGE: "text/csv; charset=utf-8",
    ContentKind.KNOWLEDGE: "text/turtle; charset=utf-8",
    ContentKind.GRAPH: "text/turtle; charset=utf-8",
}


def dataset_filename(ref: DatasetRef) -> str:
    return f"{ref.local_id}.v{ref.version}.{FILE_EXTENSIONS[ref.kind]}"


def metadata_filename(ref: DatasetRef) -> str:
    return f"{ref.local_id}.v{ref.version}.meta.json"


def serialize_dataset(dataset: Dataset) -> bytes:
    """Canonical bytes of any core dataset (dispatch by type)."""
    if isinstance(dataset, StandardisedDataset):
        return serialize_standardised(dataset)
    if isinstance(dataset, LanguageDataset):
        return serialize_language(dataset)
    if isinstance(dataset, KnowledgeDataset):
        return serialize_knowledge(dataset)
    if isinstance(dataset, GraphDataset):
        return serialize_graph(dataset)
    raise TypeError(f"no canonical serialization for {type(dataset).__name__}")


__all__ = [
    "BlankNode",
    "Iri",
    "Literal",
    "TurtleDocument",
    "FILE_EXTENSIONS",
    "MEDIA_TYPES",
    "dataset_filename",
    "metadata_filename",
    "graph_triples",
    "knowledge_triples",
    "metadata_document",
    "metadata_from_document",
    "parse_graph",
    "parse_knowledge",
    "parse_language",
    "parse_metadata",
    "parse_standardised",
    "parse_turtle",
    "schema_descriptor",
    "serialize_dataset",
    "serialize_graph",
    "serialize_knowledge",
    "serialize_language",
    "serialize_metadata",
    "serialize_standardised",
    "serialize_turtle",
]
