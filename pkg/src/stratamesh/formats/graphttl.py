"""Knowledge graphs as Turtle: one ``a`` triple per entity plus typed
literals and entity links, with dataset-level provenance triples naming
the standardised, language, and knowledge sources.
"""

from __future__ import annotations

from datetime import date
from decimal import Decimal

from ..errors import ParseError
from ..model import (
    Cell,
    ContentKind,
    DataProperty,
    Datatype,
    Entity,
    GraphDataset,
    GraphSources,
    KnowledgeDataset,
    cell_from_text,
    cell_text,
    validate,
)
from .iris import (
    META_GRAPH_DATASET,
    META_KNOWLEDGE_SOURCE,
    META_LANGUAGE_SOURCE,
    META_STANDARDISED_SOURCE,
    RDF_TYPE,
    XSD_NS,
    dataset_iri,
    parse_dataset_iri,
    vocab_ns,
)
from .turtle import Iri, Literal, Triple, TurtleDocument, parse_turtle, serialize_turtle

_XSD_OF_VALUE = {
    bool: (Datatype.BOOLEAN, "boolean"),
    int: (Datatype.INTEGER, "integer"),
    Decimal: (Datatype.DECIMAL, "decimal"),
    date: (Datatype.DATE, "date"),
    str: (Datatype.STRING, "string"),
}


def _typed_literal(value: Cell) -> Literal:
    datatype, xsd_local = _XSD_OF_VALUE[type(value)]
    if xsd_local == "string":
        return Literal(cell_text(value, datatype))
    return Literal(cell_text(value, datatype), datatype=XSD_NS + xsd_local)


def graph_triples(dataset: GraphDataset) -> list[Triple]:
    ds = Iri(dataset_iri(dataset.ref))
    ns = vocab_ns(dataset.composed_of.knowledge)
    triples: list[Triple] = [
        (ds, Iri(RDF_TYPE), Iri(META_GRAPH_DATASET)),
        (ds, Iri(META_STANDARDISED_SOURCE), Iri(dataset_iri(dataset.composed_of.standardised))),
        (ds, Iri(META_LANGUAGE_SOURCE), Iri(dataset_iri(dataset.composed_of.language))),
        (ds, Iri(META_KNOWLEDGE_SOURCE), Iri(dataset_iri(dataset.composed_of.knowledge))),
    ]
    for entity in dataset.entities:
        subject = Iri(entity.iri)
        triples.append((subject, Iri(RDF_TYPE), Iri(ns + entity.etype)))
        for prop_id, value in entity.literals:
            triples.append((subject, Iri(ns + prop_id), _typed_literal(value)))
        for prop_id, target in entity.links:
            triples.append((subject, Iri(ns + prop_id), Iri(target)))
    return triples


def serialize_graph(dataset: GraphDataset) -> bytes:
    validate(dataset).raise_if_failed()
    return serialize_turtle(TurtleDocument(triples=tuple(graph_triples(dataset))))


_EXPECTED_XSD = {
    Datatype.STRING: "string",
    Datatype.IDENTIFIER: "string",
    Datatype.INTEGER: "integer",
    Datatype.DECIMAL: "decimal",
    Datatype.BOOLEAN: "boolean",
    Datatype.DATE: "date",
}


def parse_graph(data: bytes, knowledge: KnowledgeDataset, location: str = "") -> GraphDataset:
    doc = parse_turtle(data, location)
    by_subject: dict[str, list[tuple[str, object]]] = {}
    for s, p, o in doc.triples:
        if not isinstance(s, Iri):
            raise ParseError("blank node subjects are not part of the graph format", location)
        by_subject.setdefault(s.value, []).append((p.value, o))

    ds_iri = None
    for subject, preds in by_subject.items():
        for p, o in preds:
            if p == RDF_TYPE and isinstance(o, Iri) and o.value == META_GRAPH_DATASET:
                if ds_iri is not None:
                    raise ParseError("document must describe exactly one graph dataset", location)
                ds_iri = subject
    if ds_iri is None:
        raise ParseError("document must describe exactly one graph dataset", location)
    ref = parse_dataset_iri(ds_iri)

    sources = {}
    for p, o in by_subject[ds_iri]:
        if p in (META_STANDARDISED_SOURCE, META_LANGUAGE_SOURCE, META_KNOWLEDGE_SOURCE):
            if not isinstance(o, Iri):
                raise ParseError(f"source link {p} must be an IRI", location)
            sources[p] = parse_dataset_iri(o.value)
        elif p != RDF_TYPE:
            raise ParseError(f"unexpected predicate <{p}> on the dataset node", location)
    missing = {META_STANDARDISED_SOURCE, META_LANGUAGE_SOURCE, META_KNOWLEDGE_SOURCE} - set(sources)
    if missing:
        raise ParseError(f"dataset node is missing source links: {sorted(missing)}", location)
    composed_of = GraphSources(
        standardised=sources[META_STANDARDISED_SOURCE],
        language=sources[META_LANGUAGE_SOURCE],
        knowledge=sources[META_KNOWLEDGE_SOURCE],
    )
    if composed_of.knowledge != knowledge.ref:
        raise ParseError(
            f"graph was composed with {composed_of.knowledge}, not {knowledge.ref}", location
        )
    ns = vocab_ns(knowledge.ref)

    entities = []
    for subject in sorted(by_subject):
        if subject == ds_iri:
            continue
        preds = by_subject[subject]
        types = [o.value for p, o in preds if p == RDF_TYPE and isinstance(o, Iri)]
        if len(types) != 1 or not types[0].startswith(ns):
            raise ParseError(f"entity <{subject}> must have exactly one type in the knowledge vocabulary", location)
        etype_id = types[0][len(ns):]
        if not knowledge.has_etype(etype_id):
            raise ParseError(f"entity <{subject}> has undeclared type {etype_id!r}", location)
        chain = knowledge.ancestry(etype_id)
        data_props: dict[str, DataProperty] = {p.prop_id: p for e in chain for p in e.data_properties}
        object_props = {p.prop_id for e in chain for p in e.object_properties}
        literals: list[tuple[str, Cell]] = []
        links: list[tuple[str, str]] = []
        for p, o in preds:
            if p == RDF_TYPE:
                continue
            if not p.startswith(ns):
                raise ParseError(f"predicate <{p}> is not declared by {knowledge.ref}", location)
            prop_id = p[len(ns):]
            if prop_id in object_props:
                if not isinstance(o, Iri):
                    raise ParseError(f"object property {prop_id!r} needs an IRI object", location)
                links.append((prop_id, o.value))
            elif prop_id in data_props:
                if not isinstance(o, Literal):
                    raise ParseError(f"data property {prop_id!r} needs a literal object", location)
                datatype = data_props[prop_id].datatype
                declared = (o.datatype or XSD_NS + "string").rsplit("#", 1)[-1]
                if declared != _EXPECTED_XSD[datatype]:
                    raise ParseError(
                        f"literal for {prop_id!r} is typed xsd:{declared}, expected xsd:{_EXPECTED_XSD[datatype]}",
                        location,
                    )
                try:
                    literals.append((prop_id, cell_from_text(o.lexical, datatype)))
                except ValueError as exc:
                    raise ParseError(f"bad literal for {prop_id!r}: {exc}", location) from exc
            else:
                raise ParseError(f"predicate <{p}> is not declared by {knowledge.ref}", location)
        entities.append(Entity(iri=subject, etype=etype_id, literals=tuple(literals), links=tuple(links)))

    if ref.kind is not ContentKind.GRAPH:
        raise ParseError(f"dataset IRI {ds_iri!r} is not a graph ref", location)
    return GraphDataset(ref=ref, composed_of=composed_of, entities=tuple(entities))
