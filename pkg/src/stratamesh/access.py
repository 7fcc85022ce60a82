"""Access requests for request-policy datasets.

Approval issues a token valid for exactly one successful download; the
consume step is linearized so concurrent double-spends fail for all but
one caller. Requests persist as JSON next to the repository index.
"""

from __future__ import annotations

import secrets
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import NotFoundError, PolicyError
from .formats.common import canonical_json_bytes, load_json, ref_from_json, ref_to_json
from .model import DatasetRef, format_timestamp, parse_timestamp, utc_now
from .repository import write_atomic


class RequestStatus(str, Enum):
    PENDING = "pending"
    APPROVED = "approved"
    DENIED = "denied"


@dataclass(frozen=True)
class AccessRequest:
    request_id: str
    ref: DatasetRef
    contact: str
    justification: str
    status: RequestStatus
    created_at: datetime
    token: Optional[str] = None
    token_consumed: bool = False

    def to_json(self, include_token: bool = True) -> dict:
        doc = {
            "request_id": self.request_id,
            "ref": ref_to_json(self.ref),
            "contact": self.contact,
            "justification": self.justification,
            "status": self.status.value,
            "created_at": format_timestamp(self.created_at),
            "token_consumed": self.token_consumed,
        }
        if include_token:
            doc["token"] = self.token
        return doc

    @classmethod
    def from_json(cls, obj: dict) -> "AccessRequest":
        return cls(
            request_id=obj["request_id"],
            ref=ref_from_json(obj["ref"]),
            contact=obj["contact"],
            justification=obj["justification"],
            status=RequestStatus(obj["status"]),
            created_at=parse_timestamp(obj["created_at"]),
            token=obj.get("token"),
            token_consumed=obj.get("token_consumed", False),
        )


class RequestStore:
    """File-backed store; every mutation holds one lock and rewrites the
    file atomically through the caller-visible dict.
    """

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._requests: dict[str, AccessRequest] = {}
        if self.path.is_file():
            doc = load_json(self.path.read_bytes(), str(self.path))
            for obj in doc.get("requests", []):
                request = AccessRequest.from_json(obj)
                self._requests[request.request_id] = request

    def _save(self) -> None:
        doc = {"requests": [r.to_json() for r in sorted(self._requests.values(), key=lambda r: r.request_id)]}
        write_atomic(self.path, canonical_json_bytes(doc))

    def create(self, ref: DatasetRef, contact: str, justification: str) -> AccessRequest:
        with self._lock:
            request = AccessRequest(
                request_id=uuid.uuid4().hex,
                ref=ref,
                contact=contact,
                justification=justification,
                status=RequestStatus.PENDING,
                created_at=utc_now(),
            )
            self._requests[request.request_id] = request
            self._save()
            return request

    def get(self, request_id: str) -> AccessRequest:
        request = self._requests.get(request_id)
        if request is None:
            raise NotFoundError(f"no access request {request_id!r}")
        return request

    def list_requests(self) -> list[AccessRequest]:
        return sorted(self._requests.values(), key=lambda r: (r.created_at, r.request_id))

    def _transition(self, request_id: str, status: RequestStatus) -> AccessRequest:
        with self._lock:
            request = self.get(request_id)
            if request.status is not RequestStatus.PENDING:
                raise PolicyError(f"request {request_id} was already {request.status.value}")
            token = secrets.token_urlsafe(16) if status is RequestStatus.APPROVED else None
            request = replace(request, status=status, token=token)
            self._requests[request_id] = request
            self._save()
            return request

    def approve(self, request_id: str) -> AccessRequest:
        return self._transition(request_id, RequestStatus.APPROVED)

    def deny(self, request_id: str) -> AccessRequest:
        return self._transition(request_id, RequestStatus.DENIED)

    def consume_token(self, ref: DatasetRef, token: str) -> bool:
        """Atomically spend a token for *ref*. True exactly once per
        approved request; False for unknown, foreign, or spent tokens.
        """
        if not token:
            return False
        with self._lock:
            for request in self._requests.values():
                if (
                    request.token == token
                    and request.status is RequestStatus.APPROVED
                    and not request.token_consumed
                    and (request.ref.node_id, request.ref.local_id, request.ref.version)
                    == (ref.node_id, ref.local_id, ref.version)
                ):
                    self._requests[request.request_id] = replace(request, token_consumed=True)
                    self._save()
                    return True
            return False
