"""Catalogue HTTP API: landing, dataset list with search, dataset detail
with resolved link URLs, policy-gated download, and the access-request
flow. JSON-first; the web UI is a separate client of this API.

Error bodies are always ``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import formats
from .access import RequestStatus, RequestStore
from .errors import (
    IntegrityError,
    MeshError,
    NotFoundError,
    ParseError,
    PolicyError,
    ValidationError,
)
from .federation import PeerRegistry, catalogue_url
from .formats.common import ref_to_json
from .model import CORE_KINDS, ContentKind, DatasetRef, DownloadPolicy, MetadataRecord
from .repository import Partition, Repository, node_to_json
from .search import SearchQuery, search

API_PREFIX = "/api/v1"


class AccessRequestBody(BaseModel):
    contact: str
    justification: str = ""


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _link_url(ref: DatasetRef, repo: Repository, registry: PeerRegistry) -> Optional[str]:
    """Absolute catalogue URL for a linked ref: this node for local refs,
    the owning peer's base URL for remote ones, null when unresolvable.
    """
    if ref.kind not in CORE_KINDS:
        return None
    if ref.node_id == repo.node.node_id:
        return catalogue_url(repo.node.base_url, ref)
    base = registry.base_url_of(ref.node_id)
    return catalogue_url(base, ref) if base else None


def _list_item(record: MetadataRecord, repo: Repository) -> dict:
    return {
        "ref": ref_to_json(record.ref),
        "title": dict(sorted(record.title.items())),
        "kind": record.ref.kind.value,
        "categories": list(record.categories),
        "catalogue_url": catalogue_url(repo.node.base_url, record.ref),
    }


def build_app(repo: Repository, registry: PeerRegistry, requests: RequestStore) -> FastAPI:
    app = FastAPI(title="stratamesh catalogue", version="1", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"], allow_headers=["*"]
    )

    @app.exception_handler(MeshError)
    async def mesh_error_handler(request: Request, exc: MeshError):
        status = 500
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, PolicyError):
            status = 403
        elif isinstance(exc, (ValidationError, ParseError)):
            status = 400
        elif isinstance(exc, IntegrityError):
            status = 500
        return _error(status, exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        fields = ", ".join(
            ".".join(str(piece) for piece in err.get("loc", ()) if piece != "query")
            for err in exc.errors()
        )
        return _error(400, "invalid_query", f"malformed parameters: {fields}")

    def _distributed_records() -> list[MetadataRecord]:
        return [
            repo.get_metadata(entry.ref) for entry in repo.list_entries(Partition.DREP)
        ]

    def _find_ref(node_id: str, local_id: str, version: int) -> DatasetRef:
        entry = repo.find(Partition.DREP, node_id, local_id, version)
        if entry is None:
            raise NotFoundError(f"{node_id}/{local_id}/v{version} is not distributed by this node")
        return entry.ref

    @app.get(API_PREFIX + "/node")
    def get_node():
        counts = {
            kind.value: len(repo.list_entries(Partition.DREP, kind=kind))
            for kind in (
                ContentKind.STANDARDISED,
                ContentKind.LANGUAGE,
                ContentKind.KNOWLEDGE,
                ContentKind.GRAPH,
            )
        }
        return {"node": node_to_json(repo.node), "counts": counts}

    @app.get(API_PREFIX + "/datasets")
    def list_datasets(
        text: Optional[str] = None,
        kind: list[str] = Query(default=[]),
        category: list[str] = Query(default=[]),
        language_tag: Optional[str] = None,
        page: int = 1,
        page_size: int = Query(default=20),
    ):
        kinds = set()
        for value in kind:
            try:
                kinds.add(ContentKind(value))
            except ValueError:
                raise ParseError(f"kind: {value!r} is not a content kind") from None
        try:
            query = SearchQuery(
                text=text,
                kinds=frozenset(kinds),
                categories=frozenset(category),
                language_tag=language_tag,
                page=page,
                page_size=page_size,
            )
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
        results = search(_distributed_records(), query)
        return {
            "items": [_list_item(r, repo) for r in results.records],
            "page": results.page,
            "page_size": results.page_size,
            "total": results.total,
        }

    @app.get(API_PREFIX + "/datasets/{node_id}/{local_id}/{version}")
    def dataset_detail(node_id: str, local_id: str, version: int):
        ref = _find_ref(node_id, local_id, version)
        record = repo.get_metadata(ref)
        links = {}
        for name, refs in (
            ("composed_of", record.links.composed_of),
            ("uses_language", record.links.uses_language),
            ("derived_from", record.links.derived_from),
        ):
            links[name] = [
                {"ref": ref_to_json(r), "catalogue_url": _link_url(r, repo, registry)}
                for r in refs
            ]
        return {
            "record": formats.metadata_document(record),
            "links": links,
            "download_url": catalogue_url(repo.node.base_url, ref) + "/download",
        }

    @app.get(API_PREFIX + "/datasets/{node_id}/{local_id}/{version}/download")
    def download(node_id: str, local_id: str, version: int, token: Optional[str] = None):
        ref = _find_ref(node_id, local_id, version)
        record = repo.get_metadata(ref)
        if record.download_policy is DownloadPolicy.REQUEST:
            if token is None:
                raise PolicyError(
                    "this dataset requires an approved access request; POST "
                    f"{catalogue_url(repo.node.base_url, ref)}/requests with contact and "
                    "justification, then download with the issued token"
                )
            if not requests.consume_token(ref, token):
                raise PolicyError("token is unknown, already spent, or not for this dataset")
        data = repo.get_bytes(ref, Partition.DREP)
        return Response(
            content=data,
            media_type=formats.MEDIA_TYPES.get(ref.kind, "application/octet-stream"),
            headers={"X-Content-SHA256": record.content_hash},
        )

    @app.post(API_PREFIX + "/datasets/{node_id}/{local_id}/{version}/requests", status_code=201)
    def create_request(node_id: str, local_id: str, version: int, body: AccessRequestBody):
        ref = _find_ref(node_id, local_id, version)
        record = repo.get_metadata(ref)
        if record.download_policy is not DownloadPolicy.REQUEST:
            return _error(
                409,
                "automatic_policy",
                "this dataset downloads automatically; no access request is needed",
            )
        request = requests.create(ref, body.contact, body.justification)
        return request.to_json(include_token=False)

    @app.get(API_PREFIX + "/requests/{request_id}")
    def request_status(request_id: str):
        return requests.get(request_id).to_json(include_token=False)

    @app.get(API_PREFIX + "/admin/requests")
    def admin_list_requests(status: Optional[str] = None):
        wanted = RequestStatus(status) if status else None
        return {
            "requests": [
                r.to_json() for r in requests.list_requests() if wanted is None or r.status is wanted
            ]
        }

    @app.post(API_PREFIX + "/admin/requests/{request_id}/approve")
    def approve_request(request_id: str):
        return requests.approve(request_id).to_json()

    @app.post(API_PREFIX + "/admin/requests/{request_id}/deny")
    def deny_request(request_id: str):
        return requests.deny(request_id).to_json()

    return app


def create_app(root: Path | str) -> FastAPI:
    """Wire the service from a repository root directory (node.json,
    peers.json, requests.json live there).
    """
    root = Path(root)
    repo = Repository(root)
    registry = PeerRegistry(repo.node.node_id, root / "peers.json")
    requests = RequestStore(root / "requests.json")
    return build_app(repo, registry, requests)
