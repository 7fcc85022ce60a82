"""Domain types for stratified content, metadata, and node identity.

All types are immutable values: sequences are normalized to tuples and
brought into canonical order on construction, so value equality and the
canonical serializations in :mod:`stratamesh.formats` agree.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from decimal import Decimal
from enum import Enum
from typing import Any, Iterable, Optional, Union

from .errors import ValidationError

NODE_ID_RE = re.compile(r"^[a-z][a-z0-9-]{1,31}$")
LOCAL_ID_RE = re.compile(r"^[a-z0-9][a-z0-9_-]{0,63}$")
SLUG_RE = re.compile(r"^[a-z][a-z0-9_]*$")
LANGUAGE_TAG_RE = re.compile(r"^[A-Za-z]{2,8}(-[A-Za-z0-9]{1,8})*$")
IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:[^\s<>\"{}|^`\\]*$")
HEX_DIGEST_RE = re.compile(r"^[0-9a-f]{64}$")


def slugify(text: str) -> str:
    """Lower-case *text* and squeeze every non-alphanumeric run to one `_`."""
    slug = re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")
    return slug


class ContentKind(str, Enum):
    """Kinds of repository content.

    The first four are produced by the transform pipeline (core/distribution
    content); the last three label raw source-partition content.
    """

    STANDARDISED = "standardised"
    LANGUAGE = "language"
    KNOWLEDGE = "knowledge"
    GRAPH = "graph"
    LOW_QUALITY = "low_quality"
    EXTERNAL_LANGUAGE = "external_language"
    EXTERNAL_REFERENCE = "external_reference"


CORE_KINDS = frozenset(
    {ContentKind.STANDARDISED, ContentKind.LANGUAGE, ContentKind.KNOWLEDGE, ContentKind.GRAPH}
)
SOURCE_KINDS = frozenset(
    {ContentKind.LOW_QUALITY, ContentKind.EXTERNAL_LANGUAGE, ContentKind.EXTERNAL_REFERENCE}
)


class Datatype(str, Enum):
    STRING = "string"
    INTEGER = "integer"
    DECIMAL = "decimal"
    BOOLEAN = "boolean"
    DATE = "date"
    IDENTIFIER = "identifier"


class Role(str, Enum):
    PLAIN = "plain"
    PRIMARY_KEY = "primary_key"
    FOREIGN_KEY = "foreign_key"


class DownloadPolicy(str, Enum):
    AUTOMATIC = "automatic"
    REQUEST = "request"


Cell = Union[str, int, Decimal, bool, date, None]

# Cross-type sort ranks keep canonical row ordering total even on
# ill-typed rows (validate reports those separately).
_SORT_RANK = {type(None): 0, bool: 1, int: 2, Decimal: 3, date: 4, str: 5}


def cell_sort_key(value: Cell) -> tuple:
    rank = _SORT_RANK.get(type(value), 6)
    if value is None:
        return (0, "")
    return (rank, value)


def cell_text(value: Cell, datatype: Datatype) -> str:
    """Canonical textual form of a non-null cell value."""
    if value is None:
        raise ValueError("null cell has no canonical text")
    if datatype is Datatype.BOOLEAN:
        return "true" if value else "false"
    if datatype is Datatype.INTEGER:
        return str(int(value))
    if datatype is Datatype.DECIMAL:
        text = format(value, "f")
        if "." in text:
            text = text.rstrip("0").rstrip(".")
        return "0" if text in ("-0", "") else text
    if datatype is Datatype.DATE:
        return value.isoformat()
    return str(value)


def cell_from_text(text: str, datatype: Datatype) -> Cell:
    """Parse canonical text back into a typed cell value.

    Strict: dates must be ISO `YYYY-MM-DD`, booleans `true`/`false`.
    Raises ValueError on any mismatch.
    """
    if datatype in (Datatype.STRING, Datatype.IDENTIFIER):
        return text
    if datatype is Datatype.BOOLEAN:
        if text == "true":
            return True
        if text == "false":
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if datatype is Datatype.INTEGER:
        if not re.fullmatch(r"[+-]?\d+", text):
            raise ValueError(f"not an integer: {text!r}")
        return int(text)
    if datatype is Datatype.DECIMAL:
        if not re.fullmatch(r"[+-]?(\d+(\.\d+)?|\.\d+)", text):
            raise ValueError(f"not a decimal: {text!r}")
        return Decimal(text)
    if datatype is Datatype.DATE:
        if not re.fullmatch(r"\d{4}-\d{2}-\d{2}", text):
            raise ValueError(f"not an ISO date: {text!r}")
        return date.fromisoformat(text)
    raise ValueError(f"unknown datatype: {datatype}")


def cell_conforms(value: Cell, datatype: Datatype) -> bool:
    if value is None:
        return True
    if datatype is Datatype.BOOLEAN:
        return isinstance(value, bool)
    if datatype is Datatype.INTEGER:
        return isinstance(value, int) and not isinstance(value, bool)
    if datatype is Datatype.DECIMAL:
        return isinstance(value, Decimal) and value.is_finite()
    if datatype is Datatype.DATE:
        return isinstance(value, date)
    if datatype is Datatype.IDENTIFIER:
        return (
            isinstance(value, str)
            and len(value) > 0
            and not any(ch.isspace() or ord(ch) < 0x20 for ch in value)
        )
    if datatype is Datatype.STRING:
        return isinstance(value, str) and "\x00" not in value
    return False


# ---------------------------------------------------------------------------
# Node identity and dataset handles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodeDescriptor:
    """Identity of one mesh node and its public catalogue endpoint."""

    node_id: str
    name: str
    domain_description: dict[str, str]
    base_url: str
    publisher: str


@dataclass(frozen=True, order=True)
class DatasetRef:
    """Globally unique dataset handle: (node, local id, version) plus kind."""

    node_id: str
    local_id: str
    version: int
    kind: ContentKind

    def __str__(self) -> str:
        return f"{self.node_id}/{self.local_id}/v{self.version}"

    def with_kind(self, kind: ContentKind) -> "DatasetRef":
        return replace(self, kind=kind)


# ---------------------------------------------------------------------------
# Source (raw) datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceDataset:
    """Raw tabular data as collected: string cells under raw headers.

    Rows are tuples aligned with ``headers``; ``None`` marks a cell already
    recognized as null by the cleaning step.
    """

    ref: DatasetRef
    headers: tuple[str, ...]
    rows: tuple[tuple[Optional[str], ...], ...]
    provenance: str = ""
    retrieved_at: Optional[datetime] = None

    def __post_init__(self):
        object.__setattr__(self, "headers", tuple(self.headers))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))


# ---------------------------------------------------------------------------
# Standardised datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Column:
    attribute: str
    datatype: Datatype
    role: Role = Role.PLAIN
    target: Optional[str] = None  # referenced table, foreign keys only


@dataclass(frozen=True)
class Table:
    """One typed table; rows are kept in canonical order.

    Canonical row order is by primary-key value when the table has one,
    else lexicographic over the whole row.
    """

    name: str
    columns: tuple[Column, ...]
    rows: tuple[tuple[Cell, ...], ...]

    def __post_init__(self):
        columns = tuple(self.columns)
        object.__setattr__(self, "columns", columns)
        pk = next((i for i, c in enumerate(columns) if c.role is Role.PRIMARY_KEY), None)
        rows = [tuple(r) for r in self.rows]

        def key(row: tuple[Cell, ...]):
            full = tuple(cell_sort_key(c) for c in row)
            return (cell_sort_key(row[pk]), full) if pk is not None and pk < len(row) else full

        object.__setattr__(self, "rows", tuple(sorted(rows, key=key)))

    @property
    def primary_key(self) -> Optional[Column]:
        return next((c for c in self.columns if c.role is Role.PRIMARY_KEY), None)

    def column_index(self, attribute: str) -> int:
        for i, c in enumerate(self.columns):
            if c.attribute == attribute:
                return i
        raise KeyError(attribute)


@dataclass(frozen=True)
class StandardisedDataset:
    """Cleaned, typed tabular data: the data-value layer."""

    ref: DatasetRef
    tables: tuple[Table, ...]

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(sorted(self.tables, key=lambda t: t.name)))

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Language datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lexicalization:
    lemma: str
    language_tag: str
    gloss: str


@dataclass(frozen=True)
class Concept:
    concept_id: str
    lexicalizations: tuple[Lexicalization, ...]

    def __post_init__(self):
        lex = tuple(sorted(self.lexicalizations, key=lambda x: (x.language_tag, x.lemma)))
        object.__setattr__(self, "lexicalizations", lex)


@dataclass(frozen=True)
class LanguageDataset:
    """Concept identifiers with multilingual lexicalizations and glosses."""

    ref: DatasetRef
    concepts: tuple[Concept, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "concepts", tuple(sorted(self.concepts, key=lambda c: c.concept_id))
        )

    def concept_ids(self) -> set[str]:
        return {c.concept_id for c in self.concepts}

    def concept(self, concept_id: str) -> Concept:
        for c in self.concepts:
            if c.concept_id == concept_id:
                return c
        raise KeyError(concept_id)


# ---------------------------------------------------------------------------
# Knowledge datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataProperty:
    prop_id: str
    concept: str
    datatype: Datatype


@dataclass(frozen=True)
class ObjectProperty:
    prop_id: str
    concept: str
    target: str  # etype_id


@dataclass(frozen=True)
class Discriminator:
    """Which attribute value selects a specialized entity type."""

    attribute: str
    value: str


@dataclass(frozen=True)
class EType:
    etype_id: str
    concept: str
    parent: Optional[str] = None
    discriminator: Optional[Discriminator] = None
    key_property: Optional[str] = None  # prop_id of the identifying data property
    data_properties: tuple[DataProperty, ...] = ()
    object_properties: tuple[ObjectProperty, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self,
            "data_properties",
            tuple(sorted(self.data_properties, key=lambda p: p.prop_id)),
        )
        object.__setattr__(
            self,
            "object_properties",
            tuple(sorted(self.object_properties, key=lambda p: p.prop_id)),
        )


@dataclass(frozen=True)
class KnowledgeDataset:
    """Entity types, their properties, and functional specializations."""

    ref: DatasetRef
    language_refs: tuple[DatasetRef, ...]
    etypes: tuple[EType, ...]

    def __post_init__(self):
        object.__setattr__(self, "language_refs", tuple(sorted(self.language_refs)))
        object.__setattr__(
            self, "etypes", tuple(sorted(self.etypes, key=lambda e: e.etype_id))
        )

    def etype(self, etype_id: str) -> EType:
        for e in self.etypes:
            if e.etype_id == etype_id:
                return e
        raise KeyError(etype_id)

    def has_etype(self, etype_id: str) -> bool:
        return any(e.etype_id == etype_id for e in self.etypes)

    def children(self, etype_id: str) -> tuple[EType, ...]:
        return tuple(e for e in self.etypes if e.parent == etype_id)

    def ancestry(self, etype_id: str) -> tuple[EType, ...]:
        """The etype followed by its parents up to the root."""
        chain = []
        seen = set()
        current: Optional[str] = etype_id
        while current is not None and current not in seen:
            seen.add(current)
            e = self.etype(current)
            chain.append(e)
            current = e.parent
        return tuple(chain)

    def root_of(self, etype_id: str) -> EType:
        return self.ancestry(etype_id)[-1]


# ---------------------------------------------------------------------------
# Graph datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphSources:
    """The three datasets a graph dataset is composed of."""

    standardised: DatasetRef
    language: DatasetRef
    knowledge: DatasetRef


@dataclass(frozen=True)
class Entity:
    iri: str
    etype: str
    literals: tuple[tuple[str, Cell], ...] = ()
    links: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "literals", tuple(sorted(tuple(x) for x in self.literals))
        )
        object.__setattr__(self, "links", tuple(sorted(tuple(x) for x in self.links)))


@dataclass(frozen=True)
class GraphDataset:
    """A knowledge graph composed from one S, one L, and one K dataset."""

    ref: DatasetRef
    composed_of: GraphSources
    entities: tuple[Entity, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "entities", tuple(sorted(self.entities, key=lambda e: e.iri))
        )


# ---------------------------------------------------------------------------
# Metadata records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetadataLinks:
    composed_of: tuple[DatasetRef, ...] = ()
    uses_language: tuple[DatasetRef, ...] = ()
    derived_from: tuple[DatasetRef, ...] = ()

    def __post_init__(self):
        for name in ("composed_of", "uses_language", "derived_from"):
            object.__setattr__(self, name, tuple(sorted(getattr(self, name))))


@dataclass(frozen=True)
class MetadataRecord:
    """Catalogue description of one distributed dataset."""

    ref: DatasetRef
    title: dict[str, str]
    description: dict[str, str]
    categories: tuple[str, ...]
    license: str
    issued_at: datetime
    publisher: str
    download_policy: DownloadPolicy
    links: MetadataLinks = field(default_factory=MetadataLinks)
    content_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(sorted(set(self.categories))))


Dataset = Union[SourceDataset, StandardisedDataset, LanguageDataset, KnowledgeDataset, GraphDataset]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "issues", tuple(self.issues))

    @property
    def ok(self) -> bool:
        return not self.issues

    def raise_if_failed(self) -> None:
        if self.issues:
            raise ValidationError(self)

    def __bool__(self) -> bool:
        return self.ok


class _Collector:
    def __init__(self):
        self.issues: list[ValidationIssue] = []

    def add(self, code: str, path: str, message: str) -> None:
        self.issues.append(ValidationIssue(code, path, message))

    def check(self, condition: bool, code: str, path: str, message: str) -> bool:
        if not condition:
            self.add(code, path, message)
        return condition

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.issues))


def _validate_ref(ref: DatasetRef, out: _Collector, path: str) -> None:
    out.check(bool(NODE_ID_RE.match(ref.node_id)), "bad_node_id", path, f"node_id {ref.node_id!r} is not a valid node identifier")
    out.check(bool(LOCAL_ID_RE.match(ref.local_id)), "bad_local_id", path, f"local_id {ref.local_id!r} is not a valid local identifier")
    out.check(ref.version >= 1, "bad_version", path, f"version must be positive, got {ref.version}")


def _validate_multilingual(text: dict[str, str], out: _Collector, path: str, required: bool) -> None:
    if required and not text:
        out.add("missing_language", path, "at least one language tag is required")
    for tag, value in text.items():
        out.check(bool(LANGUAGE_TAG_RE.match(tag)), "bad_language_tag", f"{path}[{tag}]", f"{tag!r} is not a BCP-47 language tag")
        out.check(isinstance(value, str) and bool(value), "empty_text", f"{path}[{tag}]", "text must be non-empty")


def _validate_node(node: NodeDescriptor, out: _Collector) -> None:
    path = f"node/{node.node_id}"
    out.check(bool(NODE_ID_RE.match(node.node_id)), "bad_node_id", path, f"node_id {node.node_id!r} must match {NODE_ID_RE.pattern}")
    out.check(bool(node.name), "empty_name", path, "name must be non-empty")
    out.check(bool(node.publisher), "empty_publisher", path, "publisher must be non-empty")
    _validate_multilingual(node.domain_description, out, f"{path}/domain_description", required=True)
    if not re.match(r"^https?://", node.base_url) or not IRI_RE.match(node.base_url):
        out.add("bad_base_url", path, f"base_url {node.base_url!r} must be an absolute http(s) URL")
    elif node.base_url.endswith("/"):
        out.add("bad_base_url", path, "base_url must not end with a trailing slash")


def _validate_source(ds: SourceDataset, out: _Collector) -> None:
    path = f"source/{ds.ref.local_id}"
    _validate_ref(ds.ref, out, path)
    out.check(ds.ref.kind in SOURCE_KINDS, "bad_kind", path, f"source dataset kind must be a source kind, got {ds.ref.kind.value}")
    width = len(ds.headers)
    for i, row in enumerate(ds.rows):
        if len(row) != width:
            out.add("ragged_row", f"{path}/row[{i}]", f"row has {len(row)} cells, expected {width}")


def _validate_standardised(ds: StandardisedDataset, out: _Collector) -> None:
    root = f"standardised/{ds.ref.local_id}"
    _validate_ref(ds.ref, out, root)
    out.check(ds.ref.kind is ContentKind.STANDARDISED, "bad_kind", root, f"expected kind standardised, got {ds.ref.kind.value}")
    names = [t.name for t in ds.tables]
    for name in sorted({n for n in names if names.count(n) > 1}):
        out.add("duplicate_table", f"{root}/{name}", "table name is not unique")
    by_name = {t.name: t for t in ds.tables}
    for table in ds.tables:
        path = f"{root}/{table.name}"
        out.check(bool(SLUG_RE.match(table.name)), "bad_slug", path, f"table name {table.name!r} is not a slug")
        attrs = [c.attribute for c in table.columns]
        for attr in sorted({a for a in attrs if attrs.count(a) > 1}):
            out.add("duplicate_attribute", f"{path}/{attr}", "column attribute is not unique")
        pk_cols = [c for c in table.columns if c.role is Role.PRIMARY_KEY]
        out.check(len(pk_cols) <= 1, "multiple_primary_keys", path, "a table may have at most one primary key column")
        for col in table.columns:
            cpath = f"{path}/{col.attribute}"
            out.check(bool(SLUG_RE.match(col.attribute)), "bad_slug", cpath, f"attribute {col.attribute!r} is not a slug")
            if col.role is Role.FOREIGN_KEY:
                if col.target is None:
                    out.add("missing_target", cpath, "foreign key column must name a target table")
                elif col.target not in by_name:
                    out.add("unknown_target", cpath, f"foreign key targets unknown table {col.target!r}")
            elif col.target is not None:
                out.add("unexpected_target", cpath, "only foreign key columns may declare a target")
        for i, row in enumerate(table.rows):
            if len(row) != len(table.columns):
                out.add("ragged_row", f"{path}/row[{i}]", f"row has {len(row)} cells, expected {len(table.columns)}")
                continue
            for col, value in zip(table.columns, row):
                if not cell_conforms(value, col.datatype):
                    out.add(
                        "bad_cell",
                        f"{path}/row[{i}]/{col.attribute}",
                        f"value {value!r} does not conform to datatype {col.datatype.value}",
                    )
        # primary key: no nulls, no duplicates
        if pk_cols:
            idx = table.column_index(pk_cols[0].attribute)
            seen: set = set()
            for i, row in enumerate(table.rows):
                if len(row) != len(table.columns):
                    continue
                value = row[idx]
                if value is None:
                    out.add("null_key", f"{path}/row[{i}]", "primary key value is null")
                elif value in seen:
                    out.add("duplicate_key", f"{path}/row[{i}]", f"duplicate primary key value {value!r}")
                else:
                    seen.add(value)
    # foreign keys resolve to target primary keys
    for table in ds.tables:
        path = f"{root}/{table.name}"
        for col in table.columns:
            if col.role is not Role.FOREIGN_KEY or col.target not in by_name:
                continue
            target = by_name[col.target]
            tpk = target.primary_key
            if tpk is None:
                out.add("target_has_no_key", f"{path}/{col.attribute}", f"foreign key target table {col.target!r} has no primary key")
                continue
            tidx = target.column_index(tpk.attribute)
            known = {row[tidx] for row in target.rows if len(row) == len(target.columns)}
            cidx = table.column_index(col.attribute)
            for i, row in enumerate(table.rows):
                if len(row) != len(table.columns):
                    continue
                value = row[cidx]
                if value is not None and value not in known:
                    out.add(
                        "dangling_foreign_key",
                        f"{path}/row[{i}]/{col.attribute}",
                        f"value {value!r} not present in {col.target}.{tpk.attribute}",
                    )


def _validate_language(ds: LanguageDataset, out: _Collector) -> None:
    root = f"language/{ds.ref.local_id}"
    _validate_ref(ds.ref, out, root)
    out.check(ds.ref.kind is ContentKind.LANGUAGE, "bad_kind", root, f"expected kind language, got {ds.ref.kind.value}")
    ids = [c.concept_id for c in ds.concepts]
    for cid in sorted({i for i in ids if ids.count(i) > 1}):
        out.add("duplicate_concept", f"{root}/{cid}", "concept_id is not unique")
    for concept in ds.concepts:
        path = f"{root}/{concept.concept_id}"
        out.check(bool(SLUG_RE.match(concept.concept_id)), "bad_slug", path, f"concept_id {concept.concept_id!r} is not a slug")
        out.check(len(concept.lexicalizations) >= 1, "missing_lexicalization", path, "concept needs at least one lexicalization")
        tags = [x.language_tag for x in concept.lexicalizations]
        for tag in sorted({t for t in tags if tags.count(t) > 1}):
            out.add("duplicate_language_tag", f"{path}[{tag}]", "one lemma per language tag per concept")
        for lex in concept.lexicalizations:
            lpath = f"{path}[{lex.language_tag}]"
            out.check(bool(LANGUAGE_TAG_RE.match(lex.language_tag)), "bad_language_tag", lpath, f"{lex.language_tag!r} is not a BCP-47 tag")
            out.check(bool(lex.lemma.strip()), "empty_lemma", lpath, "lemma must be non-empty")
            out.check(bool(lex.gloss.strip()), "empty_gloss", lpath, "gloss must be non-empty")


def _validate_knowledge(
    ds: KnowledgeDataset, out: _Collector, context: tuple[Any, ...]
) -> None:
    root = f"knowledge/{ds.ref.local_id}"
    _validate_ref(ds.ref, out, root)
    out.check(ds.ref.kind is ContentKind.KNOWLEDGE, "bad_kind", root, f"expected kind knowledge, got {ds.ref.kind.value}")
    out.check(len(ds.language_refs) >= 1, "missing_language_ref", root, "knowledge dataset must reference at least one language dataset")
    for ref in ds.language_refs:
        out.check(ref.kind is ContentKind.LANGUAGE, "bad_kind", f"{root}/language_refs", f"{ref} is not a language dataset ref")

    ids = [e.etype_id for e in ds.etypes]
    props = [p.prop_id for e in ds.etypes for p in (*e.data_properties, *e.object_properties)]
    for name in sorted({n for n in ids + props if (ids + props).count(n) > 1}):
        out.add("duplicate_identifier", f"{root}/{name}", "etype and property identifiers share one namespace and must be unique")
    for name in ids + props:
        if name == "concept":
            out.add("reserved_identifier", f"{root}/{name}", "'concept' is reserved for the concept annotation")

    known = set(ids)
    for etype in ds.etypes:
        path = f"{root}/{etype.etype_id}"
        out.check(bool(SLUG_RE.match(etype.etype_id)), "bad_slug", path, f"etype_id {etype.etype_id!r} is not a slug")
        if etype.parent is not None:
            out.check(etype.parent in known, "unknown_parent", path, f"parent {etype.parent!r} is not an etype")
            out.check(
                etype.discriminator is not None,
                "missing_discriminator",
                path,
                "specialized etype must carry the discriminator that selects it",
            )
        elif etype.discriminator is not None:
            out.add("unexpected_discriminator", path, "root etype must not carry a discriminator")
        if etype.key_property is not None:
            out.check(
                any(p.prop_id == etype.key_property for p in etype.data_properties),
                "unknown_key_property",
                path,
                f"key property {etype.key_property!r} is not a data property of this etype",
            )
        for prop in etype.data_properties:
            out.check(bool(SLUG_RE.match(prop.prop_id)), "bad_slug", f"{path}/{prop.prop_id}", f"prop_id {prop.prop_id!r} is not a slug")
        for prop in etype.object_properties:
            out.check(bool(SLUG_RE.match(prop.prop_id)), "bad_slug", f"{path}/{prop.prop_id}", f"prop_id {prop.prop_id!r} is not a slug")
            out.check(prop.target in known, "unknown_target", f"{path}/{prop.prop_id}", f"object property targets unknown etype {prop.target!r}")

    # acyclicity of the specialization relation
    for etype in ds.etypes:
        seen: set[str] = set()
        current: Optional[str] = etype.etype_id
        while current is not None:
            if current in seen:
                out.add("specialization_cycle", f"{root}/{etype.etype_id}", f"parent chain revisits {current!r}")
                break
            seen.add(current)
            nxt = next((e.parent for e in ds.etypes if e.etype_id == current), None)
            current = nxt

    # concept resolution, only when language context is supplied
    languages = [d for d in context if isinstance(d, LanguageDataset)]
    in_scope = [d for d in languages if d.ref in ds.language_refs]
    if in_scope:
        concepts: set[str] = set()
        for lang in in_scope:
            concepts |= lang.concept_ids()
        for etype in ds.etypes:
            path = f"{root}/{etype.etype_id}"
            if etype.concept not in concepts:
                out.add("unresolved_concept", path, f"concept {etype.concept!r} not found in referenced language datasets")
            for prop in (*etype.data_properties, *etype.object_properties):
                if prop.concept not in concepts:
                    out.add("unresolved_concept", f"{path}/{prop.prop_id}", f"concept {prop.concept!r} not found in referenced language datasets")


def _validate_graph(ds: GraphDataset, out: _Collector, context: tuple[Any, ...]) -> None:
    root = f"graph/{ds.ref.local_id}"
    _validate_ref(ds.ref, out, root)
    out.check(ds.ref.kind is ContentKind.GRAPH, "bad_kind", root, f"expected kind graph, got {ds.ref.kind.value}")
    expected = {
        "standardised": (ds.composed_of.standardised, ContentKind.STANDARDISED),
        "language": (ds.composed_of.language, ContentKind.LANGUAGE),
        "knowledge": (ds.composed_of.knowledge, ContentKind.KNOWLEDGE),
    }
    for field_name, (ref, kind) in expected.items():
        out.check(ref.kind is kind, "bad_kind", f"{root}/composed_of/{field_name}", f"{ref} must have kind {kind.value}")

    iris = [e.iri for e in ds.entities]
    for iri in sorted({i for i in iris if iris.count(i) > 1}):
        out.add("duplicate_iri", f"{root}/{iri}", "entity IRIs must be unique")
    known_iris = set(iris)
    for entity in ds.entities:
        path = f"{root}/{entity.iri}"
        out.check(bool(IRI_RE.match(entity.iri)), "bad_iri", path, f"{entity.iri!r} is not an absolute IRI")
        for _, target in entity.links:
            if target not in known_iris:
                out.add("dangling_link", path, f"link target {target!r} is not an entity of this dataset")

    knowledge = next(
        (d for d in context if isinstance(d, KnowledgeDataset) and d.ref == ds.composed_of.knowledge),
        None,
    )
    if knowledge is not None:
        for entity in ds.entities:
            path = f"{root}/{entity.iri}"
            if not knowledge.has_etype(entity.etype):
                out.add("unknown_etype", path, f"etype {entity.etype!r} not declared by {knowledge.ref}")
                continue
            chain = knowledge.ancestry(entity.etype)
            data_props = {p.prop_id: p for e in chain for p in e.data_properties}
            object_props = {p.prop_id for e in chain for p in e.object_properties}
            for prop_id, value in entity.literals:
                prop = data_props.get(prop_id)
                if prop is None:
                    out.add("undeclared_property", f"{path}/{prop_id}", f"literal property {prop_id!r} not declared on {entity.etype!r} or its ancestors")
                elif not cell_conforms(value, prop.datatype) or value is None:
                    out.add("bad_cell", f"{path}/{prop_id}", f"value {value!r} does not conform to {prop.datatype.value}")
            for prop_id, _ in entity.links:
                if prop_id not in object_props:
                    out.add("undeclared_property", f"{path}/{prop_id}", f"link property {prop_id!r} not declared on {entity.etype!r} or its ancestors")


def _validate_metadata(record: MetadataRecord, out: _Collector) -> None:
    root = f"metadata/{record.ref.local_id}"
    _validate_ref(record.ref, out, root)
    _validate_multilingual(record.title, out, f"{root}/title", required=True)
    _validate_multilingual(record.description, out, f"{root}/description", required=True)
    for cat in record.categories:
        out.check(bool(SLUG_RE.match(cat)), "bad_slug", f"{root}/categories", f"category {cat!r} is not a slug")
    out.check(bool(record.license), "empty_license", root, "license must be non-empty")
    out.check(bool(record.publisher), "empty_publisher", root, "publisher must be non-empty")
    out.check(
        record.issued_at.tzinfo is not None and record.issued_at.utcoffset() == timezone.utc.utcoffset(None),
        "bad_timestamp",
        root,
        "issued_at must be a UTC timestamp",
    )
    if record.content_hash:
        out.check(bool(HEX_DIGEST_RE.match(record.content_hash)), "bad_hash", root, "content_hash must be 64 lowercase hex chars")

    links = record.links
    kind = record.ref.kind
    if kind is ContentKind.GRAPH:
        kinds = sorted(r.kind.value for r in links.composed_of)
        if kinds != ["knowledge", "language", "standardised"]:
            out.add("bad_links", f"{root}/composed_of", "graph records carry exactly one standardised, one language and one knowledge ref")
    else:
        out.check(not links.composed_of, "bad_links", f"{root}/composed_of", f"{kind.value} records must not carry composed_of links")
    if kind is ContentKind.KNOWLEDGE:
        out.check(
            len(links.uses_language) >= 1 and all(r.kind is ContentKind.LANGUAGE for r in links.uses_language),
            "bad_links",
            f"{root}/uses_language",
            "knowledge records carry at least one language ref",
        )
    else:
        out.check(not links.uses_language, "bad_links", f"{root}/uses_language", f"{kind.value} records must not carry uses_language links")
    for ref in links.derived_from:
        _validate_ref(ref, out, f"{root}/derived_from")


def validate(dataset: Any, context: Iterable[Any] = ()) -> ValidationReport:
    """Check every invariant of *dataset*; cross-dataset invariants are
    checked only when the referenced datasets appear in *context*.

    Returns a report; never raises.
    """
    out = _Collector()
    ctx = tuple(context)
    if isinstance(dataset, NodeDescriptor):
        _validate_node(dataset, out)
    elif isinstance(dataset, DatasetRef):
        _validate_ref(dataset, out, str(dataset))
    elif isinstance(dataset, SourceDataset):
        _validate_source(dataset, out)
    elif isinstance(dataset, StandardisedDataset):
        _validate_standardised(dataset, out)
    elif isinstance(dataset, LanguageDataset):
        _validate_language(dataset, out)
    elif isinstance(dataset, KnowledgeDataset):
        _validate_knowledge(dataset, out, ctx)
    elif isinstance(dataset, GraphDataset):
        _validate_graph(dataset, out, ctx)
    elif isinstance(dataset, MetadataRecord):
        _validate_metadata(dataset, out)
    else:
        raise TypeError(f"cannot validate {type(dataset).__name__}")
    return out.report()


def canonical_hash(dataset: Dataset) -> str:
    """SHA-256 of the dataset's canonical byte serialization.

    Equal values hash equal; any field change changes the digest. Raises
    ``ValidationError`` naming the first violated invariant when the
    dataset is not well-formed.
    """
    from . import formats

    validate(dataset).raise_if_failed()
    return hashlib.sha256(formats.serialize_dataset(dataset)).hexdigest()


def utc_now() -> datetime:
    """Current UTC time truncated to whole seconds (canonical timestamps)."""
    return datetime.now(timezone.utc).replace(microsecond=0)


def parse_timestamp(text: str) -> datetime:
    ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} must carry a UTC offset")
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
