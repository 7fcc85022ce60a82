"""Durable node storage: source (srep), core (crep), and distribution
(drep) partitions on the filesystem, with a JSON index and content-hash
verification on every read.

Layout under the repository root::

    node.json                   owning node descriptor
    repo.json                   index, `repo-format: 1`
    srep/<section>/<file>       raw collected bytes
    crep/<kind>/<file>          canonical pipeline outputs
    drep/<kind>/<file>          distributed copies + <file>.meta.json

Mutations are serialized by an in-process lock and written atomically
(temp file + rename), so readers never observe partial entries.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional

from . import formats
from .errors import (
    IntegrityError,
    NotFoundError,
    RepositoryError,
    VersionConflictError,
)
from .formats.common import canonical_json_bytes, load_json, ref_from_json, ref_to_json
from .formats.iris import META_KNOWLEDGE_SOURCE, parse_dataset_iri
from .model import (
    CORE_KINDS,
    SOURCE_KINDS,
    ContentKind,
    Dataset,
    DatasetRef,
    MetadataRecord,
    NodeDescriptor,
    ValidationIssue,
    ValidationReport,
    canonical_hash,
    format_timestamp,
    parse_timestamp,
    utc_now,
    validate,
)

REPO_FORMAT = 1
INDEX_FILE = "repo.json"
NODE_FILE = "node.json"
REPO_ROOT_ENV = "STRATAMESH_REPO"


class Partition(str, Enum):
    SREP = "srep"
    CREP = "crep"
    DREP = "drep"


@dataclass(frozen=True)
class RepositoryEntry:
    ref: DatasetRef
    partition: Partition
    stored_at: datetime
    content_hash: str
    file: str  # path relative to the repository root
    srep_section: Optional[ContentKind] = None
    provenance: str = ""
    metadata_file: Optional[str] = None
    promotion_warnings: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "ref": ref_to_json(self.ref),
            "partition": self.partition.value,
            "srep_section": self.srep_section.value if self.srep_section else None,
            "stored_at": format_timestamp(self.stored_at),
            "content_hash": self.content_hash,
            "file": self.file,
            "provenance": self.provenance,
            "metadata_file": self.metadata_file,
            "promotion_warnings": list(self.promotion_warnings),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RepositoryEntry":
        return cls(
            ref=ref_from_json(obj["ref"]),
            partition=Partition(obj["partition"]),
            srep_section=ContentKind(obj["srep_section"]) if obj.get("srep_section") else None,
            stored_at=parse_timestamp(obj["stored_at"]),
            content_hash=obj["content_hash"],
            file=obj["file"],
            provenance=obj.get("provenance", ""),
            metadata_file=obj.get("metadata_file"),
            promotion_warnings=tuple(obj.get("promotion_warnings", [])),
        )


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Repository:
    """One node's storage. All mutations go through a single lock."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._lock = threading.Lock()
        if not (self.root / INDEX_FILE).is_file():
            raise RepositoryError(f"{self.root} is not an initialized repository (run init first)")
        self._load()

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def initialize(cls, root: Path | str, node: NodeDescriptor) -> "Repository":
        root = Path(root)
        validate(node).raise_if_failed()
        if (root / INDEX_FILE).exists():
            raise RepositoryError(f"{root} already contains a repository")
        write_atomic(root / NODE_FILE, canonical_json_bytes(node_to_json(node)))
        write_atomic(
            root / INDEX_FILE,
            canonical_json_bytes({"repo-format": REPO_FORMAT, "entries": []}),
        )
        for partition in Partition:
            (root / partition.value).mkdir(parents=True, exist_ok=True)
        return cls(root)

    def _load(self) -> None:
        doc = load_json((self.root / INDEX_FILE).read_bytes(), str(self.root))
        if doc.get("repo-format") != REPO_FORMAT:
            raise RepositoryError(f"unsupported repo-format {doc.get('repo-format')!r}")
        self._entries: list[RepositoryEntry] = [RepositoryEntry.from_json(e) for e in doc.get("entries", [])]
        self.node = node_from_json(
            load_json((self.root / NODE_FILE).read_bytes(), str(self.root))
        )

    def _save_index(self) -> None:
        doc = {"repo-format": REPO_FORMAT, "entries": [e.to_json() for e in self._entries]}
        write_atomic(self.root / INDEX_FILE, canonical_json_bytes(doc))

    # -- lookups -----------------------------------------------------------

    def find(
        self, partition: Partition, node_id: str, local_id: str, version: int
    ) -> Optional[RepositoryEntry]:
        for entry in self._entries:
            if (
                entry.partition is partition
                and entry.ref.node_id == node_id
                and entry.ref.local_id == local_id
                and entry.ref.version == version
            ):
                return entry
        return None

    def entry(self, ref: DatasetRef, partition: Partition) -> RepositoryEntry:
        found = self.find(partition, ref.node_id, ref.local_id, ref.version)
        if found is None:
            raise NotFoundError(f"{ref} is not stored in {partition.value}")
        return found

    def list_entries(
        self,
        partition: Partition,
        kind: Optional[ContentKind] = None,
        section: Optional[ContentKind] = None,
        category: Optional[str] = None,
    ) -> list[RepositoryEntry]:
        """Entries of one partition, deterministically ordered by
        (local_id, version). The category filter applies to distributed
        entries via their metadata records.
        """
        out = []
        for entry in self._entries:
            if entry.partition is not partition:
                continue
            if kind is not None and entry.ref.kind is not kind:
                continue
            if section is not None and entry.srep_section is not section:
                continue
            if category is not None:
                if entry.partition is not Partition.DREP:
                    continue
                record = self.get_metadata(entry.ref)
                if category not in record.categories:
                    continue
            out.append(entry)
        return sorted(out, key=lambda e: (e.ref.local_id, e.ref.version))

    def get_bytes(self, ref: DatasetRef, partition: Partition) -> bytes:
        """Read stored bytes, verifying the recorded content hash."""
        entry = self.entry(ref, partition)
        path = self.root / entry.file
        if not path.is_file():
            raise IntegrityError(f"{ref}: stored file {entry.file} is missing")
        data = path.read_bytes()
        if _sha256(data) != entry.content_hash:
            raise IntegrityError(f"{ref}: stored bytes do not match the recorded content hash")
        return data

    def get_metadata(self, ref: DatasetRef) -> MetadataRecord:
        entry = self.entry(ref, Partition.DREP)
        if entry.metadata_file is None:
            raise IntegrityError(f"{ref}: distributed entry has no metadata file")
        path = self.root / entry.metadata_file
        if not path.is_file():
            raise IntegrityError(f"{ref}: metadata file {entry.metadata_file} is missing")
        return formats.parse_metadata(path.read_bytes(), entry.metadata_file)

    # -- mutations ---------------------------------------------------------

    def _check_free(self, partition: Partition, ref: DatasetRef) -> None:
        if self.find(partition, ref.node_id, ref.local_id, ref.version) is not None:
            raise VersionConflictError(
                f"{ref.node_id}/{ref.local_id}/v{ref.version} already exists in "
                f"{partition.value}; stored versions are immutable"
            )

    def ingest_source(
        self,
        data: bytes,
        ref: DatasetRef,
        section: ContentKind,
        provenance: str = "",
    ) -> RepositoryEntry:
        """Store raw bytes in the source partition."""
        if section not in SOURCE_KINDS:
            raise RepositoryError(f"{section.value} is not a source partition section")
        if ref.kind is not section:
            raise RepositoryError(
                f"ref kind {ref.kind.value} does not match source section {section.value}"
            )
        validate(ref).raise_if_failed()
        with self._lock:
            self._check_free(Partition.SREP, ref)
            file = f"srep/{section.value}/{formats.dataset_filename(ref)}"
            write_atomic(self.root / file, data)
            entry = RepositoryEntry(
                ref=ref,
                partition=Partition.SREP,
                srep_section=section,
                stored_at=utc_now(),
                content_hash=_sha256(data),
                file=file,
                provenance=provenance,
            )
            self._entries.append(entry)
            self._save_index()
            return entry

    def store_core(self, dataset: Dataset, data: Optional[bytes] = None) -> RepositoryEntry:
        """Store a pipeline output in the core partition. When *data* is
        supplied it must be the canonical serialization of *dataset*.
        """
        canonical = formats.serialize_dataset(dataset)
        if data is not None and _sha256(data) != _sha256(canonical):
            raise IntegrityError(
                f"{dataset.ref}: supplied bytes do not match the canonical serialization"
            )
        digest = _sha256(canonical)
        if dataset.ref.kind not in CORE_KINDS:
            raise RepositoryError(f"{dataset.ref.kind.value} content does not belong in crep")
        with self._lock:
            self._check_free(Partition.CREP, dataset.ref)
            file = f"crep/{dataset.ref.kind.value}/{formats.dataset_filename(dataset.ref)}"
            write_atomic(self.root / file, canonical)
            entry = RepositoryEntry(
                ref=dataset.ref,
                partition=Partition.CREP,
                stored_at=utc_now(),
                content_hash=digest,
                file=file,
            )
            self._entries.append(entry)
            self._save_index()
            return entry

    def promote_to_distribution(
        self,
        ref: DatasetRef,
        metadata: MetadataRecord,
        known_nodes: Iterable[str] = (),
        anonymize: Optional[Callable[[bytes], bytes]] = None,
    ) -> RepositoryEntry:
        """Copy a core entry into the distribution partition alongside its
        metadata record.

        Link targets that are neither distributed here nor owned by a node
        in *known_nodes* are recorded as warnings, not errors: they may
        live on peers this node has not registered yet. *anonymize* is a
        reserved transform slot; it must currently preserve the bytes
        (the content hash seals them).
        """
        source = self.entry(ref, Partition.CREP)
        if metadata.ref != ref:
            raise RepositoryError(f"metadata ref {metadata.ref} does not match {ref}")
        validate(metadata).raise_if_failed()
        if metadata.content_hash != source.content_hash:
            raise IntegrityError(
                f"{ref}: metadata content_hash does not match the stored core entry"
            )
        data = self.get_bytes(ref, Partition.CREP)
        if anonymize is not None:
            data = anonymize(data)
            if _sha256(data) != source.content_hash:
                raise IntegrityError(f"{ref}: anonymization hook altered the content bytes")

        warnings = []
        known = set(known_nodes) | {self.node.node_id}
        for target in (*metadata.links.composed_of, *metadata.links.uses_language):
            if self.find(Partition.DREP, target.node_id, target.local_id, target.version):
                continue
            if target.node_id not in known or target.node_id == self.node.node_id:
                warnings.append(f"link target {target} is not distributed here and not a known peer")

        with self._lock:
            self._check_free(Partition.DREP, ref)
            file = f"drep/{ref.kind.value}/{formats.dataset_filename(ref)}"
            meta_file = f"drep/{ref.kind.value}/{formats.metadata_filename(ref)}"
            write_atomic(self.root / file, data)
            write_atomic(self.root / meta_file, formats.serialize_metadata(metadata))
            entry = RepositoryEntry(
                ref=ref,
                partition=Partition.DREP,
                stored_at=utc_now(),
                content_hash=source.content_hash,
                file=file,
                metadata_file=meta_file,
                promotion_warnings=tuple(warnings),
            )
            self._entries.append(entry)
            self._save_index()
            return entry

    # -- integrity ---------------------------------------------------------

    def integrity_check(self) -> ValidationReport:
        """Empty report iff every stored file matches its recorded hash,
        every distributed entry has a matching core counterpart, and every
        distributed entry carries parseable metadata with the same hash.
        """
        issues: list[ValidationIssue] = []
        for entry in self._entries:
            where = f"{entry.partition.value}/{entry.ref}"
            path = self.root / entry.file
            if not path.is_file():
                issues.append(ValidationIssue("missing_file", where, f"stored file {entry.file} is missing"))
            elif _sha256(path.read_bytes()) != entry.content_hash:
                issues.append(ValidationIssue("hash_mismatch", where, f"stored file {entry.file} does not match its recorded hash"))
            if entry.partition is Partition.DREP:
                twin = self.find(Partition.CREP, entry.ref.node_id, entry.ref.local_id, entry.ref.version)
                if twin is None:
                    issues.append(ValidationIssue("subset_violation", where, "distributed entry has no core counterpart"))
                elif twin.content_hash != entry.content_hash:
                    issues.append(ValidationIssue("subset_violation", where, "distributed entry differs from its core counterpart"))
                if entry.metadata_file is None:
                    issues.append(ValidationIssue("missing_metadata", where, "distributed entry has no metadata record"))
                else:
                    meta_path = self.root / entry.metadata_file
                    if not meta_path.is_file():
                        issues.append(ValidationIssue("missing_metadata", where, f"metadata file {entry.metadata_file} is missing"))
                    else:
                        try:
                            record = formats.parse_metadata(meta_path.read_bytes(), entry.metadata_file)
                        except Exception as exc:
                            issues.append(ValidationIssue("bad_metadata", where, f"metadata does not parse: {exc}"))
                        else:
                            if record.content_hash != entry.content_hash:
                                issues.append(ValidationIssue("hash_mismatch", where, "metadata content_hash differs from the stored entry"))
        return ValidationReport(tuple(issues))


def load_dataset(repo: Repository, ref: DatasetRef, partition: Partition) -> Dataset:
    """Parse stored bytes back into a typed dataset.

    Graphs need their knowledge dataset as parse context; it is looked up
    in the core partition first, then among fetched external references.
    """
    data = repo.get_bytes(ref, partition)
    if ref.kind is ContentKind.STANDARDISED:
        return formats.parse_standardised(data, str(ref))
    if ref.kind is ContentKind.LANGUAGE:
        return formats.parse_language(data, str(ref))
    if ref.kind is ContentKind.KNOWLEDGE:
        return formats.parse_knowledge(data, str(ref))
    if ref.kind is ContentKind.GRAPH:
        doc = formats.parse_turtle(data, str(ref))
        kref = None
        for s, p, o in doc.triples:
            if p.value == META_KNOWLEDGE_SOURCE and isinstance(o, formats.Iri):
                kref = parse_dataset_iri(o.value)
        if kref is None:
            raise IntegrityError(f"{ref}: stored graph names no knowledge source")
        if repo.find(Partition.CREP, kref.node_id, kref.local_id, kref.version):
            kdata = repo.get_bytes(kref, Partition.CREP)
        else:
            kdata = repo.get_bytes(kref.with_kind(ContentKind.EXTERNAL_REFERENCE), Partition.SREP)
        knowledge = formats.parse_knowledge(kdata, str(kref))
        return formats.parse_graph(data, knowledge, str(ref))
    raise RepositoryError(f"{ref.kind.value} content has no typed loader")


def node_to_json(node: NodeDescriptor) -> dict:
    return {
        "node_id": node.node_id,
        "name": node.name,
        "domain_description": dict(sorted(node.domain_description.items())),
        "base_url": node.base_url,
        "publisher": node.publisher,
    }


def node_from_json(obj: dict) -> NodeDescriptor:
    node = NodeDescriptor(
        node_id=obj["node_id"],
        name=obj["name"],
        domain_description=dict(obj["domain_description"]),
        base_url=obj["base_url"],
        publisher=obj["publisher"],
    )
    validate(node).raise_if_failed()
    return node


def resolve_repo_root(explicit: Optional[str]) -> Path:
    """Repository root from a flag value or the environment."""
    root = explicit or os.environ.get(REPO_ROOT_ENV)
    if not root:
        raise RepositoryError(
            f"no repository root: pass --repo or set {REPO_ROOT_ENV}"
        )
    return Path(root)
