"""Knowledge datasets as OWL in the Turtle subset.

Fixed vocabulary mapping: entity types become ``owl:Class``, functional
specialization becomes ``rdfs:subClassOf``, data/object properties become
``owl:DatatypeProperty``/``owl:ObjectProperty`` with ``rdfs:domain`` and
``rdfs:range``. Every class and property carries a concept annotation
(``<dataset>/vocab#concept``) naming its concept_id. Labels from a
language dataset are an optional, non-canonical enrichment: the canonical
bytes (and therefore the content hash) depend on the knowledge dataset
value alone.
"""

from __future__ import annotations

from typing import Optional

from ..errors import ParseError
from ..model import (
    ContentKind,
    DataProperty,
    Datatype,
    DatasetRef,
    Discriminator,
    EType,
    KnowledgeDataset,
    LanguageDataset,
    ObjectProperty,
    validate,
)
from .iris import (
    META_DISCRIMINATOR_ATTRIBUTE,
    META_DISCRIMINATOR_VALUE,
    META_KEY_PROPERTY,
    META_KNOWLEDGE_DATASET,
    META_USES_LANGUAGE,
    OWL_ANNOTATION_PROPERTY,
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_OBJECT_PROPERTY,
    RDFS_DOMAIN,
    RDFS_LABEL,
    RDFS_RANGE,
    RDFS_SUBCLASS_OF,
    RDF_TYPE,
    dataset_iri,
    parse_dataset_iri,
    vocab_ns,
    xsd_datatype,
)
from .turtle import Iri, Literal, Term, Triple, TurtleDocument, parse_turtle, serialize_turtle

_XSD_OF_DATATYPE = {
    Datatype.STRING: "string",
    Datatype.INTEGER: "integer",
    Datatype.DECIMAL: "decimal",
    Datatype.BOOLEAN: "boolean",
    Datatype.DATE: "date",
    Datatype.IDENTIFIER: "string",
}
_DATATYPE_OF_XSD = {
    "string": Datatype.STRING,
    "integer": Datatype.INTEGER,
    "decimal": Datatype.DECIMAL,
    "boolean": Datatype.BOOLEAN,
    "date": Datatype.DATE,
}

# identifier shares xsd:string, so the distinction rides on an annotation
META_DATATYPE_HINT = "mesh://meta#datatypeHint"


def knowledge_triples(
    dataset: KnowledgeDataset, language: Optional[LanguageDataset] = None
) -> list[Triple]:
    ref = dataset.ref
    ds = Iri(dataset_iri(ref))
    ns = vocab_ns(ref)
    concept_prop = Iri(ns + "concept")
    triples: list[Triple] = [(ds, Iri(RDF_TYPE), Iri(META_KNOWLEDGE_DATASET))]
    for lref in dataset.language_refs:
        triples.append((ds, Iri(META_USES_LANGUAGE), Iri(dataset_iri(lref))))
    triples.append((concept_prop, Iri(RDF_TYPE), Iri(OWL_ANNOTATION_PROPERTY)))

    def labels(subject: Iri, concept_id: str) -> None:
        if language is None:
            return
        try:
            concept = language.concept(concept_id)
        except KeyError:
            return
        for lex in concept.lexicalizations:
            triples.append((subject, Iri(RDFS_LABEL), Literal(lex.lemma, language=lex.language_tag)))

    for etype in dataset.etypes:
        cls = Iri(ns + etype.etype_id)
        triples.append((cls, Iri(RDF_TYPE), Iri(OWL_CLASS)))
        triples.append((cls, concept_prop, Literal(etype.concept)))
        labels(cls, etype.concept)
        if etype.parent is not None:
            triples.append((cls, Iri(RDFS_SUBCLASS_OF), Iri(ns + etype.parent)))
        if etype.discriminator is not None:
            triples.append((cls, Iri(META_DISCRIMINATOR_ATTRIBUTE), Literal(etype.discriminator.attribute)))
            triples.append((cls, Iri(META_DISCRIMINATOR_VALUE), Literal(etype.discriminator.value)))
        if etype.key_property is not None:
            triples.append((cls, Iri(META_KEY_PROPERTY), Iri(ns + etype.key_property)))
        for prop in etype.data_properties:
            piri = Iri(ns + prop.prop_id)
            triples.append((piri, Iri(RDF_TYPE), Iri(OWL_DATATYPE_PROPERTY)))
            triples.append((piri, Iri(RDFS_DOMAIN), cls))
            triples.append((piri, Iri(RDFS_RANGE), Iri(xsd_datatype(_XSD_OF_DATATYPE[prop.datatype]))))
            if prop.datatype is Datatype.IDENTIFIER:
                triples.append((piri, Iri(META_DATATYPE_HINT), Literal("identifier")))
            triples.append((piri, concept_prop, Literal(prop.concept)))
            labels(piri, prop.concept)
        for prop in etype.object_properties:
            piri = Iri(ns + prop.prop_id)
            triples.append((piri, Iri(RDF_TYPE), Iri(OWL_OBJECT_PROPERTY)))
            triples.append((piri, Iri(RDFS_DOMAIN), cls))
            triples.append((piri, Iri(RDFS_RANGE), Iri(ns + prop.target)))
            triples.append((piri, concept_prop, Literal(prop.concept)))
            labels(piri, prop.concept)
    return triples


def serialize_knowledge(
    dataset: KnowledgeDataset, language: Optional[LanguageDataset] = None
) -> bytes:
    """Canonical TTL bytes. Pass *language* only for the label-enriched
    human-facing export: labels are not part of the canonical form, and
    when a language dataset is given it also serves as validation context.
    """
    context = (language,) if language is not None else ()
    validate(dataset, context=context).raise_if_failed()
    return serialize_turtle(TurtleDocument(triples=tuple(knowledge_triples(dataset, language))))


class _SubjectIndex:
    def __init__(self, doc: TurtleDocument):
        self.by_subject: dict[str, dict[str, list[Term]]] = {}
        for s, p, o in doc.triples:
            if isinstance(s, Iri):
                self.by_subject.setdefault(s.value, {}).setdefault(p.value, []).append(o)

    def subjects_of_type(self, type_iri: str) -> list[str]:
        return sorted(
            s
            for s, preds in self.by_subject.items()
            if any(isinstance(o, Iri) and o.value == type_iri for o in preds.get(RDF_TYPE, ()))
        )

    def one_iri(self, subject: str, predicate: str, location: str) -> str:
        values = [o.value for o in self.by_subject.get(subject, {}).get(predicate, []) if isinstance(o, Iri)]
        if len(values) != 1:
            raise ParseError(f"<{subject}> needs exactly one {predicate}", location)
        return values[0]

    def opt_iri(self, subject: str, predicate: str) -> Optional[str]:
        values = [o.value for o in self.by_subject.get(subject, {}).get(predicate, []) if isinstance(o, Iri)]
        return values[0] if values else None

    def opt_literal(self, subject: str, predicate: str) -> Optional[str]:
        values = [o.lexical for o in self.by_subject.get(subject, {}).get(predicate, []) if isinstance(o, Literal)]
        return values[0] if values else None


def _local(iri: str, ns: str, what: str, location: str) -> str:
    if not iri.startswith(ns):
        raise ParseError(f"{what} <{iri}> is outside the dataset vocabulary", location)
    return iri[len(ns):]


def parse_knowledge(data: bytes, location: str = "") -> KnowledgeDataset:
    doc = parse_turtle(data, location)
    index = _SubjectIndex(doc)

    datasets = index.subjects_of_type(META_KNOWLEDGE_DATASET)
    if len(datasets) != 1:
        raise ParseError("document must describe exactly one knowledge dataset", location)
    ds_iri = datasets[0]
    ref = parse_dataset_iri(ds_iri)
    if ref.kind is not ContentKind.KNOWLEDGE:
        raise ParseError(f"dataset IRI {ds_iri!r} is not a knowledge ref", location)
    ns = vocab_ns(ref)
    concept_prop = ns + "concept"
    language_refs = tuple(
        parse_dataset_iri(o.value)
        for o in index.by_subject.get(ds_iri, {}).get(META_USES_LANGUAGE, [])
        if isinstance(o, Iri)
    )

    known_predicates = {
        RDF_TYPE, RDFS_SUBCLASS_OF, RDFS_DOMAIN, RDFS_RANGE, RDFS_LABEL,
        META_USES_LANGUAGE, META_DISCRIMINATOR_ATTRIBUTE, META_DISCRIMINATOR_VALUE,
        META_KEY_PROPERTY, META_DATATYPE_HINT, concept_prop,
    }
    known_types = {
        META_KNOWLEDGE_DATASET, OWL_CLASS, OWL_DATATYPE_PROPERTY,
        OWL_OBJECT_PROPERTY, OWL_ANNOTATION_PROPERTY,
    }
    for _, p, o in doc.triples:
        if p.value not in known_predicates:
            raise ParseError(f"unknown vocabulary term <{p.value}>", location)
        if p.value == RDF_TYPE and isinstance(o, Iri) and o.value not in known_types:
            raise ParseError(f"unknown vocabulary term <{o.value}>", location)

    class_iris = index.subjects_of_type(OWL_CLASS)
    classes: dict[str, dict] = {}
    for iri in class_iris:
        etype_id = _local(iri, ns, "class", location)
        concept = index.opt_literal(iri, concept_prop)
        if concept is None:
            raise ParseError(f"class <{iri}> has no concept annotation", location)
        parent_iri = index.opt_iri(iri, RDFS_SUBCLASS_OF)
        disc_attr = index.opt_literal(iri, META_DISCRIMINATOR_ATTRIBUTE)
        disc_value = index.opt_literal(iri, META_DISCRIMINATOR_VALUE)
        discriminator = None
        if disc_attr is not None or disc_value is not None:
            if disc_attr is None or disc_value is None:
                raise ParseError(f"class <{iri}> has a partial discriminator annotation", location)
            discriminator = Discriminator(attribute=disc_attr, value=disc_value)
        key_iri = index.opt_iri(iri, META_KEY_PROPERTY)
        classes[etype_id] = {
            "concept": concept,
            "parent": _local(parent_iri, ns, "parent class", location) if parent_iri else None,
            "discriminator": discriminator,
            "key_property": _local(key_iri, ns, "key property", location) if key_iri else None,
            "data": [],
            "object": [],
        }

    for iri in index.subjects_of_type(OWL_DATATYPE_PROPERTY):
        prop_id = _local(iri, ns, "property", location)
        concept = index.opt_literal(iri, concept_prop)
        if concept is None:
            raise ParseError(f"property <{iri}> has no concept annotation", location)
        domain = _local(index.one_iri(iri, RDFS_DOMAIN, location), ns, "domain", location)
        range_iri = index.one_iri(iri, RDFS_RANGE, location)
        xsd_local = range_iri.rsplit("#", 1)[-1]
        datatype = _DATATYPE_OF_XSD.get(xsd_local)
        if datatype is None:
            raise ParseError(f"unknown vocabulary term <{range_iri}>", location)
        if datatype is Datatype.STRING and index.opt_literal(iri, META_DATATYPE_HINT) == "identifier":
            datatype = Datatype.IDENTIFIER
        if domain not in classes:
            raise ParseError(f"property <{iri}> domain {domain!r} is not a declared class", location)
        classes[domain]["data"].append(DataProperty(prop_id=prop_id, concept=concept, datatype=datatype))

    for iri in index.subjects_of_type(OWL_OBJECT_PROPERTY):
        prop_id = _local(iri, ns, "property", location)
        concept = index.opt_literal(iri, concept_prop)
        if concept is None:
            raise ParseError(f"property <{iri}> has no concept annotation", location)
        domain = _local(index.one_iri(iri, RDFS_DOMAIN, location), ns, "domain", location)
        target = _local(index.one_iri(iri, RDFS_RANGE, location), ns, "range", location)
        if domain not in classes:
            raise ParseError(f"property <{iri}> domain {domain!r} is not a declared class", location)
        if target not in classes:
            raise ParseError(f"property <{iri}> range {target!r} is not a declared class", location)
        classes[domain]["object"].append(ObjectProperty(prop_id=prop_id, concept=concept, target=target))

    etypes = tuple(
        EType(
            etype_id=etype_id,
            concept=info["concept"],
            parent=info["parent"],
            discriminator=info["discriminator"],
            key_property=info["key_property"],
            data_properties=tuple(info["data"]),
            object_properties=tuple(info["object"]),
        )
        for etype_id, info in classes.items()
    )
    return KnowledgeDataset(ref=ref, language_refs=language_refs, etypes=etypes)
