"""Peer registry and cross-node operations.

Federation is pull-based: every remote interaction goes through the
peer's public catalogue API, so nodes stay autonomous. The transport is
injectable; tests wire several in-process apps together without sockets.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol

import httpx

from .errors import (
    FederationError,
    NotFoundError,
    PeerUnreachableError,
    PolicyError,
    RemoteIntegrityError,
    UnknownPeerError,
    VersionConflictError,
)
from .formats import metadata_from_document
from .formats.common import canonical_json_bytes, load_json
from .model import (
    ContentKind,
    DatasetRef,
    DownloadPolicy,
    GraphDataset,
    MetadataRecord,
    NodeDescriptor,
    StandardisedDataset,
    validate,
)
from .pipeline import compose_graph, generate_metadata
from .repository import Partition, Repository, write_atomic, node_from_json, node_to_json

DEFAULT_TTL_SECONDS = 300.0

# which source-partition section receives a fetched remote dataset
SECTION_OF_KIND = {
    ContentKind.LANGUAGE: ContentKind.EXTERNAL_LANGUAGE,
    ContentKind.KNOWLEDGE: ContentKind.EXTERNAL_REFERENCE,
}


@dataclass(frozen=True)
class TransportReply:
    status: int
    content: bytes
    headers: dict[str, str] = field(default_factory=dict)

    def json(self):
        return json.loads(self.content.decode("utf-8"))


class Transport(Protocol):
    def get(self, url: str, params: Optional[dict] = None) -> TransportReply: ...


class HttpTransport:
    """Real HTTP transport over httpx."""

    def __init__(self, timeout: float = 10.0):
        self._client = httpx.Client(timeout=timeout, follow_redirects=True)

    def get(self, url: str, params: Optional[dict] = None) -> TransportReply:
        try:
            reply = self._client.get(url, params=params)
        except httpx.HTTPError as exc:
            raise PeerUnreachableError(f"GET {url}: {exc}") from exc
        return TransportReply(reply.status_code, reply.content, dict(reply.headers))


class InProcessTransport:
    """Routes requests to ASGI apps by base URL prefix; no sockets.

    Lets a whole multi-node mesh run inside one test process.
    """

    def __init__(self, apps: dict[str, object]):
        self._apps = {base.rstrip("/"): app for base, app in apps.items()}

    def get(self, url: str, params: Optional[dict] = None) -> TransportReply:
        import asyncio

        for base, app in self._apps.items():
            if url == base or url.startswith(base + "/"):

                async def _request():
                    transport = httpx.ASGITransport(app=app)  # type: ignore[arg-type]
                    async with httpx.AsyncClient(transport=transport, base_url=base) as client:
                        return await client.get(url[len(base):] or "/", params=params)

                reply = asyncio.run(_request())
                return TransportReply(reply.status_code, reply.content, dict(reply.headers))
        raise PeerUnreachableError(f"no in-process app serves {url}")


class PeerRegistry:
    """Known peers plus a TTL cache of fetched metadata records."""

    def __init__(
        self,
        own_node_id: str,
        path: Optional[Path | str] = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.own_node_id = own_node_id
        self.path = Path(path) if path is not None else None
        self._clock = clock
        self._lock = threading.Lock()
        self._peers: dict[str, NodeDescriptor] = {}
        # keyed by (node_id, local_id, version): resolvers may not know the kind yet
        self._cache: dict[tuple[str, str, int], tuple[MetadataRecord, float, float]] = {}
        if self.path is not None and self.path.is_file():
            doc = load_json(self.path.read_bytes(), str(self.path))
            for obj in doc.get("peers", []):
                peer = node_from_json(obj)
                self._peers[peer.node_id] = peer

    def _save(self) -> None:
        if self.path is None:
            return
        doc = {"peers": [node_to_json(p) for _, p in sorted(self._peers.items())]}
        write_atomic(self.path, canonical_json_bytes(doc))

    def add_peer(self, descriptor: NodeDescriptor) -> None:
        """Idempotent for an identical descriptor; a conflicting one must
        be removed explicitly first.
        """
        validate(descriptor).raise_if_failed()
        if descriptor.node_id == self.own_node_id:
            raise FederationError("a node cannot register itself as a peer")
        with self._lock:
            existing = self._peers.get(descriptor.node_id)
            if existing is not None and existing != descriptor:
                raise FederationError(
                    f"peer {descriptor.node_id!r} is already registered with a different "
                    "descriptor; remove it first"
                )
            self._peers[descriptor.node_id] = descriptor
            self._save()

    def remove_peer(self, node_id: str) -> None:
        with self._lock:
            if node_id not in self._peers:
                raise UnknownPeerError(f"no registered peer {node_id!r}")
            del self._peers[node_id]
            self._cache = {key: hit for key, hit in self._cache.items() if key[0] != node_id}
            self._save()

    def peer(self, node_id: str) -> NodeDescriptor:
        peer = self._peers.get(node_id)
        if peer is None:
            raise UnknownPeerError(f"node {node_id!r} is not a registered peer")
        return peer

    def peers(self) -> list[NodeDescriptor]:
        return [p for _, p in sorted(self._peers.items())]

    def base_url_of(self, node_id: str) -> Optional[str]:
        peer = self._peers.get(node_id)
        return peer.base_url if peer else None

    # -- metadata cache ------------------------------------------------

    def cached(self, ref: DatasetRef) -> Optional[MetadataRecord]:
        hit = self._cache.get((ref.node_id, ref.local_id, ref.version))
        if hit is None:
            return None
        record, cached_at, ttl = hit
        if self._clock() - cached_at >= ttl:
            return None
        return record

    def remember(self, ref: DatasetRef, record: MetadataRecord, ttl: float) -> None:
        with self._lock:
            self._cache[(ref.node_id, ref.local_id, ref.version)] = (record, self._clock(), ttl)


def catalogue_url(base_url: str, ref: DatasetRef) -> str:
    return f"{base_url}/api/v1/datasets/{ref.node_id}/{ref.local_id}/{ref.version}"


def _error_message(reply: TransportReply) -> str:
    try:
        doc = reply.json()
        return doc["error"]["message"]
    except Exception:
        return reply.content.decode("utf-8", errors="replace")[:200]


class FederationClient:
    """Resolve and fetch datasets across nodes on behalf of one node."""

    def __init__(
        self,
        repo: Repository,
        registry: PeerRegistry,
        transport: Transport,
        ttl: float = DEFAULT_TTL_SECONDS,
    ):
        self.repo = repo
        self.registry = registry
        self.transport = transport
        self.ttl = ttl

    def resolve_link(self, ref: DatasetRef) -> MetadataRecord:
        """Local refs come from the distribution partition; remote refs are
        fetched from the owning peer's detail endpoint and cached.
        """
        if ref.node_id == self.registry.own_node_id:
            return self.repo.get_metadata(ref)
        peer = self.registry.peer(ref.node_id)
        cached = self.registry.cached(ref)
        if cached is not None:
            return cached
        reply = self.transport.get(catalogue_url(peer.base_url, ref))
        if reply.status == 404:
            raise NotFoundError(f"{ref} is not distributed by peer {peer.node_id!r}")
        if reply.status != 200:
            raise PeerUnreachableError(
                f"peer {peer.node_id!r} answered {reply.status}: {_error_message(reply)}"
            )
        record = metadata_from_document(reply.json().get("record"), str(ref))
        self.registry.remember(ref, record, self.ttl)
        return record

    def fetch_remote_dataset(
        self, ref: DatasetRef, token: Optional[str] = None, store: bool = True
    ) -> tuple[bytes, MetadataRecord]:
        """Download a peer's dataset, verify its advertised content hash,
        and (by default) file it into the source partition.
        """
        if ref.node_id == self.registry.own_node_id:
            raise FederationError(f"{ref} is local; fetch applies to peer datasets")
        record = self.resolve_link(ref)
        peer = self.registry.peer(ref.node_id)
        params = {"token": token} if token else None
        reply = self.transport.get(catalogue_url(peer.base_url, ref) + "/download", params=params)
        if reply.status == 403:
            raise PolicyError(
                f"peer {peer.node_id!r} requires an approved access request: {_error_message(reply)}"
            )
        if reply.status != 200:
            raise PeerUnreachableError(
                f"download from {peer.node_id!r} failed with {reply.status}: {_error_message(reply)}"
            )
        digest = hashlib.sha256(reply.content).hexdigest()
        if digest != record.content_hash:
            raise RemoteIntegrityError(
                f"{ref}: downloaded bytes hash to {digest[:12]}…, advertised "
                f"{record.content_hash[:12]}…; discarding"
            )
        if store:
            section = SECTION_OF_KIND.get(record.ref.kind, ContentKind.LOW_QUALITY)
            source_ref = record.ref.with_kind(section)
            try:
                self.repo.ingest_source(
                    reply.content,
                    source_ref,
                    section,
                    provenance=f"fetched from peer {peer.node_id} ({catalogue_url(peer.base_url, ref)})",
                )
            except VersionConflictError:
                existing = self.repo.entry(source_ref, Partition.SREP)
                if existing.content_hash != digest:
                    raise RemoteIntegrityError(
                        f"{ref}: already stored with a different content hash"
                    ) from None
        return reply.content, record

    def cross_node_compose(
        self,
        standardised: StandardisedDataset,
        knowledge_ref: DatasetRef,
        language_ref: DatasetRef,
        node: NodeDescriptor,
        policy: DownloadPolicy,
        title: dict[str, str],
        description: dict[str, str],
        categories: tuple[str, ...] = (),
        license: str = "CC-BY-4.0",
        graph_ref: Optional[DatasetRef] = None,
    ) -> tuple[GraphDataset, MetadataRecord]:
        """Compose a local graph dataset over a peer's knowledge and
        language layers; the resulting metadata links point off-node.
        """
        from .formats import parse_knowledge, parse_language

        language_bytes, _ = self.fetch_remote_dataset(language_ref)
        knowledge_bytes, _ = self.fetch_remote_dataset(knowledge_ref)
        language = parse_language(language_bytes, str(language_ref))
        knowledge = parse_knowledge(knowledge_bytes, str(knowledge_ref))
        validate(language).raise_if_failed()
        validate(knowledge, context=[language]).raise_if_failed()
        graph = compose_graph(standardised, language, knowledge, node, graph_ref)
        record = generate_metadata(
            graph,
            node,
            policy,
            title=title,
            description=description,
            categories=categories,
            license=license,
            derived_from=(standardised.ref,),
        )
        return graph, record
