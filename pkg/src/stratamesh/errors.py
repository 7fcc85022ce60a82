"""Exception taxonomy shared by all node components."""

from __future__ import annotations


class MeshError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ValidationError(MeshError):
    """A dataset or record violates one of its invariants.

    Carries the full validation report; the message names the first
    violated invariant.
    """

    code = "validation_error"

    def __init__(self, report):
        self.report = report
        first = report.issues[0] if report.issues else None
        msg = f"{first.path}: {first.message}" if first else "validation failed"
        super().__init__(msg)


class ParseError(MeshError):
    """Input bytes do not conform to the expected format."""

    code = "parse_error"

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class TransformError(MeshError):
    """A pipeline step cannot proceed (unmapped header, bad cell, ...)."""

    code = "transform_error"


class CoverageError(TransformError):
    """A knowledge dataset does not cover the tables being composed."""

    code = "coverage_error"

    def __init__(self, message: str, uncovered: tuple[str, ...] = ()):
        self.uncovered = uncovered
        super().__init__(message)


class RepositoryError(MeshError):
    code = "repository_error"


class NotFoundError(RepositoryError):
    code = "not_found"


class VersionConflictError(RepositoryError):
    """The (ref, version) already exists; stored versions are immutable."""

    code = "version_conflict"


class IntegrityError(RepositoryError):
    """Stored bytes no longer match their recorded content hash."""

    code = "integrity_error"


class PolicyError(MeshError):
    """The dataset's download policy forbids the attempted access."""

    code = "policy_error"


class FederationError(MeshError):
    code = "federation_error"


class UnknownPeerError(FederationError):
    code = "unknown_peer"


class PeerUnreachableError(FederationError):
    """Transient transport failure, distinguishable from a remote 404."""

    code = "peer_unreachable"


class RemoteIntegrityError(FederationError):
    """Fetched bytes do not hash to the remotely advertised digest."""

    code = "remote_integrity"
