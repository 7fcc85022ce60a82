"""Deterministic IRI minting.

Dataset and vocabulary IRIs are derived from the dataset ref alone (scheme
``mesh:``), so serialization never depends on where a node is currently
hosted. Entity IRIs live under the composing node's ``base_url``.
"""

from __future__ import annotations

from urllib.parse import quote, unquote

from ..errors import ParseError
from ..model import ContentKind, DatasetRef

META_NS = "mesh://meta#"

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

RDFS_SUBCLASS_OF = RDFS_NS + "subClassOf"
RDFS_DOMAIN = RDFS_NS + "domain"
RDFS_RANGE = RDFS_NS + "range"
RDFS_LABEL = RDFS_NS + "label"
OWL_CLASS = OWL_NS + "Class"
OWL_DATATYPE_PROPERTY = OWL_NS + "DatatypeProperty"
OWL_OBJECT_PROPERTY = OWL_NS + "ObjectProperty"
OWL_ANNOTATION_PROPERTY = OWL_NS + "AnnotationProperty"

META_GRAPH_DATASET = META_NS + "GraphDataset"
META_KNOWLEDGE_DATASET = META_NS + "KnowledgeDataset"
META_STANDARDISED_SOURCE = META_NS + "standardisedSource"
META_LANGUAGE_SOURCE = META_NS + "languageSource"
META_KNOWLEDGE_SOURCE = META_NS + "knowledgeSource"
META_USES_LANGUAGE = META_NS + "usesLanguage"
META_DISCRIMINATOR_ATTRIBUTE = META_NS + "discriminatorAttribute"
META_DISCRIMINATOR_VALUE = META_NS + "discriminatorValue"
META_KEY_PROPERTY = META_NS + "keyProperty"


def dataset_iri(ref: DatasetRef) -> str:
    return f"mesh://{ref.node_id}/{ref.kind.value}/{ref.local_id}/v{ref.version}"


def parse_dataset_iri(iri: str) -> DatasetRef:
    if not iri.startswith("mesh://"):
        raise ParseError(f"not a dataset IRI: {iri!r}")
    segments = iri[len("mesh://"):].split("/")
    if len(segments) != 4 or not segments[3].startswith("v"):
        raise ParseError(f"not a dataset IRI: {iri!r}")
    node_id, kind, local_id, version = segments
    try:
        return DatasetRef(node_id, local_id, int(version[1:]), ContentKind(kind))
    except ValueError as exc:
        raise ParseError(f"not a dataset IRI: {iri!r}") from exc


def vocab_ns(ref: DatasetRef) -> str:
    return dataset_iri(ref) + "/vocab#"


def vocab_iri(ref: DatasetRef, local_name: str) -> str:
    return vocab_ns(ref) + local_name


def entity_iri(base_url: str, source_local_id: str, table: str, key_text: str) -> str:
    # percent-encode the key segment so the IRI stays well-formed for any value
    return f"{base_url}/resource/{source_local_id}/{table}/{quote(key_text, safe='')}"


def entity_iri_key(iri: str) -> str:
    """The decoded final path segment of an entity IRI."""
    return unquote(iri.rsplit("/", 1)[-1])


def xsd_datatype(name: str) -> str:
    return XSD_NS + name
