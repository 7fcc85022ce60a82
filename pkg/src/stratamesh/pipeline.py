"""Config-driven transformation of raw sources into the four stratified
dataset types.

The steps are deterministic pure functions: identical (raw, config) inputs
yield identical outputs, including minted entity IRIs, so content hashes
are reproducible across runs and hosts.
"""

from __future__ import annotations

import csv
import hashlib
import io
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from .errors import CoverageError, ParseError, TransformError
from .formats import delimited
from .formats.common import canonical_json_bytes, load_json
from .formats.iris import entity_iri
from .model import (
    Cell,
    Column,
    Concept,
    ContentKind,
    DataProperty,
    Datatype,
    DatasetRef,
    Discriminator,
    EType,
    Entity,
    GraphDataset,
    GraphSources,
    KnowledgeDataset,
    LanguageDataset,
    Lexicalization,
    MetadataLinks,
    MetadataRecord,
    NodeDescriptor,
    ObjectProperty,
    Role,
    SourceDataset,
    StandardisedDataset,
    Table,
    cell_text,
    slugify,
    utc_now,
    validate,
)
from .model import DownloadPolicy

DEFAULT_NULL_MARKERS = frozenset({"", "NA", "N/A", "-", "null"})

CONFIG_FORMAT = "transform-config/1"


@dataclass(frozen=True)
class ColumnSpec:
    header: str  # cleaned raw header this column is read from
    attribute: str
    datatype: Datatype
    role: Role = Role.PLAIN
    target: Optional[str] = None


@dataclass(frozen=True)
class TableSpec:
    name: str
    columns: tuple[ColumnSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))


@dataclass(frozen=True)
class SpecializationRule:
    """Split one entity type into functional children on a column value."""

    etype: str
    attribute: str
    children: dict[str, tuple[str, str]]  # value -> (child etype_id, child concept)


@dataclass(frozen=True)
class TransformConfig:
    tables: tuple[TableSpec, ...]
    default_language_tag: str = "en"
    null_markers: frozenset[str] = DEFAULT_NULL_MARKERS
    lexicon: dict[str, tuple[Lexicalization, ...]] = field(default_factory=dict)
    specializations: tuple[SpecializationRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "null_markers", frozenset(self.null_markers))
        object.__setattr__(self, "specializations", tuple(self.specializations))
        for spec in self.tables:
            headers = [c.header for c in spec.columns]
            for h in headers:
                if headers.count(h) > 1:
                    raise TransformError(f"table {spec.name!r} maps header {h!r} twice")
        rule_targets = [r.etype for r in self.specializations]
        for etype in rule_targets:
            if rule_targets.count(etype) > 1:
                raise TransformError(f"multiple specialization rules for {etype!r}; one discriminator per table")
        for rule in self.specializations:
            for value, (child_id, concept) in rule.children.items():
                if concept not in self.lexicon:
                    raise TransformError(
                        f"specialization concept {concept!r} (for value {value!r}) is missing from the lexicon"
                    )

    def rules_for(self, table: str) -> tuple[SpecializationRule, ...]:
        return tuple(r for r in self.specializations if r.etype == table)


def config_to_json(cfg: TransformConfig) -> bytes:
    doc: dict[str, Any] = {
        "format": CONFIG_FORMAT,
        "default_language_tag": cfg.default_language_tag,
        "null_markers": sorted(cfg.null_markers),
        "tables": [
            {
                "name": spec.name,
                "columns": [
                    {
                        "header": c.header,
                        "attribute": c.attribute,
                        "datatype": c.datatype.value,
                        "role": c.role.value,
                        **({"target": c.target} if c.target else {}),
                    }
                    for c in spec.columns
                ],
            }
            for spec in cfg.tables
        ],
        "lexicon": {
            concept: [
                {"lemma": x.lemma, "language_tag": x.language_tag, "gloss": x.gloss}
                for x in entries
            ]
            for concept, entries in sorted(cfg.lexicon.items())
        },
        "specializations": [
            {
                "etype": rule.etype,
                "attribute": rule.attribute,
                "values": {
                    value: {"etype_id": child, "concept": concept}
                    for value, (child, concept) in sorted(rule.children.items())
                },
            }
            for rule in cfg.specializations
        ],
    }
    return canonical_json_bytes(doc)


def config_from_json(data: bytes, location: str = "") -> TransformConfig:
    doc = load_json(data, location)
    if doc.get("format") != CONFIG_FORMAT:
        raise ParseError(f"unsupported config format {doc.get('format')!r}", location)
    try:
        tables = tuple(
            TableSpec(
                name=spec["name"],
                columns=tuple(
                    ColumnSpec(
                        header=c["header"],
                        # attribute defaults to the slugged header:
                        # "Courses Taught" -> courses_taught
                        attribute=c.get("attribute") or slugify(c["header"]),
                        datatype=Datatype(c["datatype"]),
                        role=Role(c.get("role", "plain")),
                        target=c.get("target"),
                    )
                    for c in spec["columns"]
                ),
            )
            for spec in doc.get("tables", [])
        )
        lexicon = {
            concept: tuple(
                Lexicalization(x["lemma"], x["language_tag"], x["gloss"]) for x in entries
            )
            for concept, entries in doc.get("lexicon", {}).items()
        }
        specializations = tuple(
            SpecializationRule(
                etype=rule["etype"],
                attribute=rule["attribute"],
                children={
                    value: (child["etype_id"], child["concept"])
                    for value, child in rule["values"].items()
                },
            )
            for rule in doc.get("specializations", [])
        )
        return TransformConfig(
            tables=tables,
            default_language_tag=doc.get("default_language_tag", "en"),
            null_markers=frozenset(doc.get("null_markers", DEFAULT_NULL_MARKERS)),
            lexicon=lexicon,
            specializations=specializations,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed transform config: {exc!r}", location) from exc


# ---------------------------------------------------------------------------
# Collection: lenient CSV reading
# ---------------------------------------------------------------------------


def read_source_csv(
    data: bytes,
    ref: DatasetRef,
    provenance: str = "",
    retrieved_at: Optional[datetime] = None,
) -> SourceDataset:
    """Read arbitrary delimited text into a raw source dataset. Lenient:
    accepts CRLF, pads short rows with empty cells.
    """
    text = data.decode("utf-8-sig", errors="replace")
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError("source file has no header row", str(ref))
    headers = tuple(rows[0])
    width = len(headers)
    body = []
    for i, row in enumerate(rows[1:]):
        if len(row) > width:
            raise ParseError(f"row {i + 1} has {len(row)} cells, header has {width}", str(ref))
        body.append(tuple(row) + ("",) * (width - len(row)))
    return SourceDataset(
        ref=ref, headers=headers, rows=tuple(body), provenance=provenance, retrieved_at=retrieved_at
    )


# ---------------------------------------------------------------------------
# Cleaning
# ---------------------------------------------------------------------------

_CONTROL = re.compile(r"[\x00-\x1f\x7f]")
_WS_RUN = re.compile(r"\s+")


def _normalize_cell(raw: Optional[str], null_markers: frozenset[str]) -> Optional[str]:
    if raw is None:
        return None
    value = _WS_RUN.sub(" ", _CONTROL.sub(" ", raw)).strip()
    return None if value in null_markers else value


def clean(raw: SourceDataset, cfg: TransformConfig) -> SourceDataset:
    """Normalize cells, null out configured markers, drop all-null rows and
    noise columns (empty or duplicate headers, all-null columns).
    Idempotent: a second application is the identity.
    """
    headers = [_normalize_cell(h, frozenset()) or "" for h in raw.headers]
    rows = [
        tuple(_normalize_cell(cell, cfg.null_markers) for cell in row) for row in raw.rows
    ]
    # noise columns: empty or repeated headers go first
    keep = [i for i, h in enumerate(headers) if h and h not in headers[:i]]
    rows = [tuple(row[i] for i in keep) for row in rows]
    headers = [headers[i] for i in keep]
    # drop rows with no information at all
    rows = [row for row in rows if any(cell is not None for cell in row)]
    # then columns with no information in any surviving row
    keep = [i for i in range(len(headers)) if any(row[i] is not None for row in rows)]
    return SourceDataset(
        ref=raw.ref,
        headers=tuple(headers[i] for i in keep),
        rows=tuple(tuple(row[i] for i in keep) for row in rows),
        provenance=raw.provenance,
        retrieved_at=raw.retrieved_at,
    )


# ---------------------------------------------------------------------------
# Standardisation
# ---------------------------------------------------------------------------

_DATE_PATTERNS = (
    (re.compile(r"^(\d{4})-(\d{2})-(\d{2})$"), ("y", "m", "d")),
    (re.compile(r"^(\d{2})/(\d{2})/(\d{4})$"), ("d", "m", "y")),
    (re.compile(r"^(\d{4})/(\d{2})/(\d{2})$"), ("y", "m", "d")),
)

_BOOL_SYNONYMS = {
    "yes": True, "no": False, "1": True, "0": False, "true": True, "false": False,
}


def coerce_cell(text: Optional[str], datatype: Datatype, where: str) -> Cell:
    """Coerce a cleaned string cell to its declared datatype.

    Accepted spellings are wider than the canonical forms: three date
    layouts, signed numbers, and common boolean synonyms.
    """
    if text is None:
        return None
    if datatype is Datatype.STRING:
        return text
    if datatype is Datatype.IDENTIFIER:
        if any(ch.isspace() for ch in text):
            raise TransformError(f"{where}: identifier {text!r} must not contain whitespace")
        return text
    if datatype is Datatype.BOOLEAN:
        flag = _BOOL_SYNONYMS.get(text.lower())
        if flag is None:
            raise TransformError(f"{where}: cannot read {text!r} as a boolean")
        return flag
    if datatype is Datatype.INTEGER:
        if not re.fullmatch(r"[+-]?\d+", text):
            raise TransformError(f"{where}: cannot read {text!r} as an integer")
        return int(text)
    if datatype is Datatype.DECIMAL:
        try:
            value = Decimal(text)
        except InvalidOperation:
            raise TransformError(f"{where}: cannot read {text!r} as a decimal") from None
        if not value.is_finite():
            raise TransformError(f"{where}: {text!r} is not a finite decimal")
        return value
    if datatype is Datatype.DATE:
        for pattern, order in _DATE_PATTERNS:
            match = pattern.match(text)
            if match:
                parts = dict(zip(order, match.groups()))
                try:
                    return date(int(parts["y"]), int(parts["m"]), int(parts["d"]))
                except ValueError as exc:
                    raise TransformError(f"{where}: {text!r}: {exc}") from None
        raise TransformError(f"{where}: cannot read {text!r} as a date")
    raise TransformError(f"{where}: unknown datatype {datatype}")


def _canonical_columns(spec: TableSpec) -> tuple[ColumnSpec, ...]:
    """Primary key first, remaining columns sorted by attribute."""
    pk = [c for c in spec.columns if c.role is Role.PRIMARY_KEY]
    rest = sorted((c for c in spec.columns if c.role is not Role.PRIMARY_KEY), key=lambda c: c.attribute)
    return tuple(pk + rest)


def standardise(
    cleaned: SourceDataset, cfg: TransformConfig, ref: Optional[DatasetRef] = None
) -> StandardisedDataset:
    """Project the cleaned source onto the configured tables, renaming
    headers to attribute slugs and coercing values to their datatypes.

    Rows that are entirely null under a table's projection are skipped and
    exact duplicate projections collapse to one row (the usual
    denormalized-dump case). A projected header missing from the source
    yields an all-null column.
    """
    if ref is None:
        ref = DatasetRef(
            cleaned.ref.node_id, f"{cleaned.ref.local_id}-std", cleaned.ref.version,
            ContentKind.STANDARDISED,
        )
    mapped = {c.header for spec in cfg.tables for c in spec.columns}
    unmapped = [h for h in cleaned.headers if h not in mapped]
    if unmapped:
        raise TransformError(f"headers without a column mapping: {unmapped}")

    index = {h: i for i, h in enumerate(cleaned.headers)}
    tables = []
    for spec in cfg.tables:
        columns = _canonical_columns(spec)
        seen: dict[tuple, int] = {}
        rows: list[tuple[Cell, ...]] = []
        for rownum, raw_row in enumerate(cleaned.rows):
            cells = []
            for col in columns:
                pos = index.get(col.header)
                text = raw_row[pos] if pos is not None else None
                where = f"{spec.name} row {rownum} column {col.attribute}"
                cells.append(coerce_cell(text, col.datatype, where))
            if all(c is None for c in cells):
                continue
            key = tuple(
                None if c is None else cell_text(c, col.datatype)
                for col, c in zip(columns, cells)
            )
            if key in seen:
                continue
            seen[key] = rownum
            rows.append(tuple(cells))
        pk = next((i for i, c in enumerate(columns) if c.role is Role.PRIMARY_KEY), None)
        if pk is not None:
            values: set = set()
            for row in rows:
                value = row[pk]
                if value is not None:
                    if value in values:
                        raise TransformError(
                            f"table {spec.name!r}: duplicate primary key value {value!r}"
                        )
                    values.add(value)
        tables.append(
            Table(
                name=spec.name,
                columns=tuple(
                    Column(c.attribute, c.datatype, c.role, c.target) for c in columns
                ),
                rows=tuple(rows),
            )
        )
    dataset = StandardisedDataset(ref=ref, tables=tuple(tables))
    validate(dataset).raise_if_failed()
    return dataset


# ---------------------------------------------------------------------------
# Language extraction
# ---------------------------------------------------------------------------


def default_gloss(slug: str, dataset_local_id: str) -> str:
    return f"concept for {slug} as used in dataset {dataset_local_id}"


def extract_language(
    standardised: StandardisedDataset, cfg: TransformConfig, ref: Optional[DatasetRef] = None
) -> LanguageDataset:
    """One concept per table name, per attribute slug, and per lexicon
    entry. Lexicon entries win; anything else gets a default
    lexicalization in the configured language.
    """
    if ref is None:
        ref = DatasetRef(
            standardised.ref.node_id,
            f"{standardised.ref.local_id}-lang",
            standardised.ref.version,
            ContentKind.LANGUAGE,
        )
    slugs: set[str] = set(cfg.lexicon)
    for table in standardised.tables:
        slugs.add(table.name)
        for col in table.columns:
            slugs.add(col.attribute)
    concepts = []
    for slug in sorted(slugs):
        entries = cfg.lexicon.get(slug)
        if entries:
            lex = tuple(entries)
        else:
            lex = (
                Lexicalization(
                    lemma=slug.replace("_", " "),
                    language_tag=cfg.default_language_tag,
                    gloss=default_gloss(slug, standardised.ref.local_id),
                ),
            )
        concepts.append(Concept(concept_id=slug, lexicalizations=lex))
    dataset = LanguageDataset(ref=ref, concepts=tuple(concepts))
    validate(dataset).raise_if_failed()
    return dataset


# ---------------------------------------------------------------------------
# Knowledge building
# ---------------------------------------------------------------------------


def build_knowledge(
    standardised: StandardisedDataset,
    language: LanguageDataset,
    cfg: TransformConfig,
    ref: Optional[DatasetRef] = None,
) -> KnowledgeDataset:
    """One entity type per table; plain and key columns become data
    properties, foreign keys become object properties, specialization
    rules become child entity types selected by a discriminator column.
    """
    if ref is None:
        ref = DatasetRef(
            standardised.ref.node_id,
            f"{standardised.ref.local_id}-onto",
            standardised.ref.version,
            ContentKind.KNOWLEDGE,
        )
    etypes: list[EType] = []
    for table in standardised.tables:
        rules = cfg.rules_for(table.name)
        consumed: set[str] = set()
        for rule in rules:
            try:
                col = table.columns[table.column_index(rule.attribute)]
            except KeyError:
                raise TransformError(
                    f"specialization of {table.name!r}: discriminator {rule.attribute!r} is not a column"
                ) from None
            if col.role is not Role.PLAIN:
                raise TransformError(
                    f"specialization of {table.name!r}: discriminator {rule.attribute!r} must be a plain column"
                )
            if col.datatype is not Datatype.STRING:
                raise TransformError(
                    f"specialization of {table.name!r}: discriminator {rule.attribute!r} must be a string column"
                )
            idx = table.column_index(rule.attribute)
            observed = {cell_text(row[idx], Datatype.STRING) for row in table.rows if row[idx] is not None}
            uncovered = sorted(observed - set(rule.children))
            if uncovered:
                raise TransformError(
                    f"specialization of {table.name!r} on {rule.attribute!r} does not cover values {uncovered}"
                )
            consumed.add(rule.attribute)
            for value in sorted(rule.children):
                child_id, concept = rule.children[value]
                etypes.append(
                    EType(
                        etype_id=child_id,
                        concept=concept,
                        parent=table.name,
                        discriminator=Discriminator(attribute=rule.attribute, value=value),
                    )
                )
        data_props = []
        object_props = []
        key_property = None
        for col in table.columns:
            if col.attribute in consumed:
                continue
            prop_id = f"{table.name}_{col.attribute}"
            if col.role is Role.FOREIGN_KEY:
                object_props.append(
                    ObjectProperty(prop_id=prop_id, concept=col.attribute, target=col.target or "")
                )
            else:
                data_props.append(
                    DataProperty(prop_id=prop_id, concept=col.attribute, datatype=col.datatype)
                )
                if col.role is Role.PRIMARY_KEY:
                    key_property = prop_id
        etypes.append(
            EType(
                etype_id=table.name,
                concept=table.name,
                key_property=key_property,
                data_properties=tuple(data_props),
                object_properties=tuple(object_props),
            )
        )
    dataset = KnowledgeDataset(ref=ref, language_refs=(language.ref,), etypes=tuple(etypes))
    validate(dataset, context=[language]).raise_if_failed()
    return dataset


# ---------------------------------------------------------------------------
# Graph composition and decomposition
# ---------------------------------------------------------------------------


def _row_key_text(table: Table, row: tuple[Cell, ...]) -> str:
    """IRI key segment for one row: the primary key's canonical text, or a
    16-hex prefix of the hash of the whole canonical row.
    """
    pk = table.primary_key
    if pk is not None:
        value = row[table.column_index(pk.attribute)]
        return cell_text(value, pk.datatype)
    texts = [
        None if v is None else cell_text(v, c.datatype) for c, v in zip(table.columns, row)
    ]
    return hashlib.sha256(delimited.write_row(texts).encode("utf-8")).hexdigest()[:16]


def _specialize(
    knowledge: KnowledgeDataset, table: Table, row: tuple[Cell, ...], root: EType
) -> tuple[EType, set[str]]:
    """Walk child entity types whose discriminator matches the row.

    Returns the most specific etype and the set of consumed attributes.
    """
    current = root
    consumed: set[str] = set()
    while True:
        matched = []
        for child in knowledge.children(current.etype_id):
            disc = child.discriminator
            if disc is None:
                continue
            try:
                idx = table.column_index(disc.attribute)
            except KeyError:
                continue
            value = row[idx]
            if value is not None and cell_text(value, Datatype.STRING) == disc.value:
                matched.append(child)
        if not matched:
            return current, consumed
        if len(matched) > 1:
            raise TransformError(
                f"row in table {table.name!r} matches multiple specializations: "
                f"{sorted(c.etype_id for c in matched)}"
            )
        current = matched[0]
        consumed.add(current.discriminator.attribute)  # type: ignore[union-attr]


def _discriminator_attributes(knowledge: KnowledgeDataset, root_id: str) -> set[str]:
    out = set()
    stack = [root_id]
    while stack:
        for child in knowledge.children(stack.pop()):
            if child.discriminator is not None:
                out.add(child.discriminator.attribute)
            stack.append(child.etype_id)
    return out


def compose_graph(
    standardised: StandardisedDataset,
    language: LanguageDataset,
    knowledge: KnowledgeDataset,
    node: NodeDescriptor,
    ref: Optional[DatasetRef] = None,
) -> GraphDataset:
    """Merge the three layers into a knowledge graph: one entity per row,
    typed by the most specific entity type, with foreign keys as links.
    """
    if ref is None:
        ref = DatasetRef(
            standardised.ref.node_id,
            f"{standardised.ref.local_id}-graph",
            standardised.ref.version,
            ContentKind.GRAPH,
        )
    validate(standardised).raise_if_failed()
    validate(node).raise_if_failed()
    if language.ref not in knowledge.language_refs:
        raise TransformError(
            f"{knowledge.ref} does not use language dataset {language.ref}"
        )
    uncovered = [
        t.name
        for t in standardised.tables
        if not (knowledge.has_etype(t.name) and knowledge.etype(t.name).parent is None)
    ]
    if uncovered:
        raise CoverageError(
            f"knowledge dataset lacks entity types for tables: {uncovered}",
            uncovered=tuple(uncovered),
        )

    entities = []
    for table in standardised.tables:
        root = knowledge.etype(table.name)
        subtree_discs = _discriminator_attributes(knowledge, root.etype_id)
        minted: set[str] = set()
        for row in table.rows:
            iri = entity_iri(node.base_url, standardised.ref.local_id, table.name, _row_key_text(table, row))
            if iri in minted:
                raise TransformError(f"table {table.name!r}: duplicate entity IRI {iri}")
            minted.add(iri)
            etype, consumed = _specialize(knowledge, table, row, root)
            ancestry = knowledge.ancestry(etype.etype_id)
            data_props = {p.concept: p for e in ancestry for p in e.data_properties}
            object_props = {p.concept: p for e in ancestry for p in e.object_properties}
            literals = []
            links = []
            for col, value in zip(table.columns, row):
                if value is None or col.attribute in consumed:
                    continue
                if col.attribute in subtree_discs:
                    raise CoverageError(
                        f"table {table.name!r}: value {value!r} in discriminator column "
                        f"{col.attribute!r} selects no specialization",
                        uncovered=(f"{table.name}.{col.attribute}",),
                    )
                if col.role is Role.FOREIGN_KEY:
                    prop = object_props.get(col.attribute)
                    if prop is None:
                        raise CoverageError(
                            f"table {table.name!r}: no object property for column {col.attribute!r}",
                            uncovered=(f"{table.name}.{col.attribute}",),
                        )
                    target_table = standardised.table(col.target or "")
                    tpk = target_table.primary_key
                    if tpk is None:
                        raise TransformError(f"link target table {target_table.name!r} has no primary key")
                    links.append((prop.prop_id, entity_iri(
                        node.base_url, standardised.ref.local_id, target_table.name,
                        cell_text(value, tpk.datatype),
                    )))
                else:
                    prop = data_props.get(col.attribute)
                    if prop is None:
                        raise CoverageError(
                            f"table {table.name!r}: no data property for column {col.attribute!r}",
                            uncovered=(f"{table.name}.{col.attribute}",),
                        )
                    literals.append((prop.prop_id, value))
            entities.append(
                Entity(iri=iri, etype=etype.etype_id, literals=tuple(literals), links=tuple(links))
            )

    dataset = GraphDataset(
        ref=ref,
        composed_of=GraphSources(
            standardised=standardised.ref, language=language.ref, knowledge=knowledge.ref
        ),
        entities=tuple(entities),
    )
    report = validate(dataset, context=[knowledge])
    for issue in report.issues:
        if issue.code == "dangling_link":
            raise TransformError(issue.message)
    report.raise_if_failed()
    return dataset


def decompose_graph(
    graph: GraphDataset,
    language: LanguageDataset,
    knowledge: KnowledgeDataset,
) -> StandardisedDataset:
    """Rebuild the standardised layer from a graph: one table per root
    entity type, discriminator columns re-derived from entity types.

    Inverse of :func:`compose_graph` for any knowledge dataset built from
    a standardised dataset with the same table set.
    """
    validate(knowledge, context=[language]).raise_if_failed()
    validate(graph, context=[knowledge]).raise_if_failed()

    roots = [e for e in knowledge.etypes if e.parent is None]
    plans = {}
    for root in roots:
        subtree = [root]
        stack = [root.etype_id]
        while stack:
            for child in knowledge.children(stack.pop()):
                subtree.append(child)
                stack.append(child.etype_id)
        key_concept = None
        if root.key_property is not None:
            key_concept = next(
                p.concept for p in root.data_properties if p.prop_id == root.key_property
            )
        columns: dict[str, Column] = {}

        def put(col: Column) -> None:
            if col.attribute in columns and columns[col.attribute] != col:
                raise TransformError(
                    f"etype {root.etype_id!r}: conflicting columns for attribute {col.attribute!r}"
                )
            columns[col.attribute] = col

        for etype in subtree:
            if etype.discriminator is not None:
                put(Column(etype.discriminator.attribute, Datatype.STRING, Role.PLAIN))
            for prop in etype.data_properties:
                role = Role.PRIMARY_KEY if prop.concept == key_concept else Role.PLAIN
                put(Column(prop.concept, prop.datatype, role))
            for prop in etype.object_properties:
                target_root = knowledge.root_of(prop.target)
                target_key = next(
                    (
                        p
                        for p in target_root.data_properties
                        if p.prop_id == target_root.key_property
                    ),
                    None,
                )
                if target_key is None:
                    raise TransformError(
                        f"object property {prop.prop_id!r} targets {prop.target!r}, which has no key property"
                    )
                put(Column(prop.concept, target_key.datatype, Role.FOREIGN_KEY, target=target_root.etype_id))
        pk = [c for a, c in sorted(columns.items()) if c.role is Role.PRIMARY_KEY]
        rest = [c for a, c in sorted(columns.items()) if c.role is not Role.PRIMARY_KEY]
        plans[root.etype_id] = (tuple(pk + rest), [])

    entity_by_iri = {e.iri: e for e in graph.entities}

    def key_value_of(entity: Entity) -> Cell:
        root = knowledge.root_of(entity.etype)
        if root.key_property is None:
            raise TransformError(f"entity {entity.iri} is typed by keyless {root.etype_id!r}")
        for prop_id, value in entity.literals:
            if prop_id == root.key_property:
                return value
        raise TransformError(f"entity {entity.iri} is missing its key literal")

    for entity in graph.entities:
        chain = knowledge.ancestry(entity.etype)
        root = chain[-1]
        if root.etype_id not in plans:
            raise TransformError(f"entity {entity.iri} has no root entity type in {knowledge.ref}")
        columns, rows = plans[root.etype_id]
        concept_of_prop = {p.prop_id: p.concept for e in chain for p in (*e.data_properties, *e.object_properties)}
        cells: dict[str, Cell] = {}
        for etype in chain:
            if etype.discriminator is not None:
                cells[etype.discriminator.attribute] = etype.discriminator.value
        for prop_id, value in entity.literals:
            cells[concept_of_prop[prop_id]] = value
        for prop_id, target_iri in entity.links:
            target = entity_by_iri.get(target_iri)
            if target is None:
                raise TransformError(f"entity {entity.iri} links to missing {target_iri}")
            cells[concept_of_prop[prop_id]] = key_value_of(target)
        rows.append(tuple(cells.get(c.attribute) for c in columns))

    tables = tuple(
        Table(name=root_id, columns=columns, rows=tuple(rows))
        for root_id, (columns, rows) in plans.items()
    )
    dataset = StandardisedDataset(ref=graph.composed_of.standardised, tables=tables)
    validate(dataset).raise_if_failed()
    return dataset


# ---------------------------------------------------------------------------
# Metadata generation
# ---------------------------------------------------------------------------


def generate_metadata(
    dataset: Any,
    node: NodeDescriptor,
    policy: DownloadPolicy,
    title: dict[str, str],
    description: dict[str, str],
    categories: tuple[str, ...] = (),
    license: str = "CC-BY-4.0",
    derived_from: tuple[DatasetRef, ...] = (),
    issued_at: Optional[datetime] = None,
) -> MetadataRecord:
    """Build the catalogue record for a dataset, wiring the kind-specific
    link fields from the dataset itself.
    """
    from .model import canonical_hash

    if not any(v.strip() for v in title.values()):
        raise TransformError("metadata needs a title in at least one language")
    links = MetadataLinks(derived_from=tuple(derived_from))
    if isinstance(dataset, GraphDataset):
        links = MetadataLinks(
            composed_of=(
                dataset.composed_of.standardised,
                dataset.composed_of.language,
                dataset.composed_of.knowledge,
            ),
            derived_from=tuple(derived_from),
        )
    elif isinstance(dataset, KnowledgeDataset):
        links = MetadataLinks(
            uses_language=tuple(dataset.language_refs), derived_from=tuple(derived_from)
        )
    record = MetadataRecord(
        ref=dataset.ref,
        title=dict(title),
        description=dict(description),
        categories=tuple(categories),
        license=license,
        issued_at=issued_at if issued_at is not None else utc_now(),
        publisher=node.publisher,
        download_policy=policy,
        links=links,
        content_hash=canonical_hash(dataset),
    )
    validate(record).raise_if_failed()
    return record


# ---------------------------------------------------------------------------
# Whole pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    standardised: StandardisedDataset
    language: LanguageDataset
    knowledge: KnowledgeDataset
    graph: GraphDataset

    def datasets(self) -> tuple:
        return (self.standardised, self.language, self.knowledge, self.graph)


def run_pipeline(
    raw: SourceDataset,
    cfg: TransformConfig,
    node: NodeDescriptor,
    base_local_id: Optional[str] = None,
    version: Optional[int] = None,
) -> PipelineResult:
    """Execute clean → standardise → extract_language → build_knowledge →
    compose_graph with output refs minted as `<base>-{std,lang,onto,graph}`.
    """
    base = base_local_id if base_local_id is not None else raw.ref.local_id
    v = version if version is not None else raw.ref.version

    def ref(suffix: str, kind: ContentKind) -> DatasetRef:
        return DatasetRef(node.node_id, f"{base}-{suffix}", v, kind)

    cleaned = clean(raw, cfg)
    standardised_ds = standardise(cleaned, cfg, ref("std", ContentKind.STANDARDISED))
    language_ds = extract_language(standardised_ds, cfg, ref("lang", ContentKind.LANGUAGE))
    knowledge_ds = build_knowledge(
        standardised_ds, language_ds, cfg, ref("onto", ContentKind.KNOWLEDGE)
    )
    graph_ds = compose_graph(
        standardised_ds, language_ds, knowledge_ds, node, ref("graph", ContentKind.GRAPH)
    )
    return PipelineResult(standardised_ds, language_ds, knowledge_ds, graph_ds)
