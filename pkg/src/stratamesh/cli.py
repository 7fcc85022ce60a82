"""Administrator command line: collect, transform, distribute, search,
fetch, peers, serve, and integrity check.

Exit codes: 0 success, 1 validation or user error, 2 I/O or network
error. Errors print one machine-parsable line: ``error: <code>: <msg>``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import click

from . import formats
from .access import RequestStore
from .errors import (
    IntegrityError,
    MeshError,
    ParseError,
    PeerUnreachableError,
    RemoteIntegrityError,
)
from .federation import FederationClient, HttpTransport, PeerRegistry, catalogue_url
from .model import (
    ContentKind,
    DatasetRef,
    DownloadPolicy,
    LANGUAGE_TAG_RE,
)
from .pipeline import config_from_json, generate_metadata, read_source_csv, run_pipeline
from .repository import (
    Partition,
    Repository,
    load_dataset,
    node_from_json,
    node_to_json,
    resolve_repo_root,
)
from .search import SearchQuery, search


def _fail(exc: BaseException) -> "click.exceptions.Exit":
    """Map an exception to the documented exit code after printing the
    single-line error."""
    if isinstance(exc, MeshError):
        code = exc.code
        transient = isinstance(exc, (PeerUnreachableError, IntegrityError, RemoteIntegrityError))
        status = 2 if transient else 1
    elif isinstance(exc, OSError):
        code, status = "io_error", 2
    else:
        raise exc
    click.echo(f"error: {code}: {exc}", err=True)
    return click.exceptions.Exit(status)


def _parse_ref(text: str, own_node: str, kind: ContentKind = ContentKind.LOW_QUALITY) -> DatasetRef:
    """`local/vN` (own node) or `node/local/vN`."""
    parts = text.split("/")
    if len(parts) == 2:
        parts = [own_node, *parts]
    if len(parts) != 3 or not parts[2].startswith("v") or not parts[2][1:].isdigit():
        raise ParseError(f"bad ref {text!r}; expected [node/]local_id/vN")
    return DatasetRef(parts[0], parts[1], int(parts[2][1:]), kind)


def _parse_lang_map(pairs: tuple[str, ...], flag: str) -> dict[str, str]:
    out = {}
    for pair in pairs:
        tag, sep, text = pair.partition("=")
        if not sep or not LANGUAGE_TAG_RE.match(tag):
            raise ParseError(f"{flag} expects tag=text, got {pair!r}")
        out[tag] = text
    return out


def _open_repo(ctx: click.Context) -> Repository:
    return Repository(resolve_repo_root(ctx.obj.get("repo")))


def _registry(repo: Repository) -> PeerRegistry:
    return PeerRegistry(repo.node.node_id, repo.root / "peers.json")


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, ensure_ascii=False, indent=2))


@click.group()
@click.option("--repo", envvar="STRATAMESH_REPO", help="Repository root directory.")
@click.pass_context
def main(ctx: click.Context, repo: Optional[str]):
    """Administer one stratified-data mesh node."""
    ctx.ensure_object(dict)
    ctx.obj["repo"] = repo


@main.command()
@click.option("--node", "node_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def init(ctx, node_file: str, as_json: bool):
    """Create a new repository from a node descriptor file."""
    try:
        root = resolve_repo_root(ctx.obj.get("repo"))
        descriptor = node_from_json(json.loads(Path(node_file).read_text(encoding="utf-8")))
        root.mkdir(parents=True, exist_ok=True)
        Repository.initialize(root, descriptor)
    except (MeshError, OSError, json.JSONDecodeError) as exc:
        if isinstance(exc, json.JSONDecodeError):
            raise _fail(ParseError(f"{node_file}: {exc}"))
        raise _fail(exc)
    if as_json:
        _echo_json({"node": node_to_json(descriptor), "root": str(root)})
    else:
        click.echo(f"initialized node {descriptor.node_id} at {root}")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--id", "local_id", required=True, help="Local id for the collected dataset.")
@click.option("--version", default=1, show_default=True, type=int)
@click.option(
    "--section",
    type=click.Choice(["low_quality", "external_language", "external_reference"]),
    default="low_quality",
    show_default=True,
)
@click.option("--provenance", default="", help="Free-text origin note.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def collect(ctx, file: str, local_id: str, version: int, section: str, provenance: str, as_json: bool):
    """Store a raw source file in the source partition."""
    try:
        repo = _open_repo(ctx)
        kind = ContentKind(section)
        ref = DatasetRef(repo.node.node_id, local_id, version, kind)
        entry = repo.ingest_source(Path(file).read_bytes(), ref, kind, provenance)
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json(entry.to_json())
    else:
        click.echo(f"collected {ref} into srep/{section} ({entry.content_hash[:12]})")


@main.command()
@click.option("--source", required=True, help="Source ref: local_id/vN.")
@click.option("--config", "config_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--base", default=None, help="Base local id for outputs (default: source id).")
@click.option("--out-version", default=None, type=int, help="Output version (default: source version).")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def transform(ctx, source: str, config_file: str, base: Optional[str], out_version: Optional[int], as_json: bool):
    """Run the full pipeline on a collected source; outputs go to crep.

    Prints the four dataset refs in order: standardised, language,
    knowledge, graph.
    """
    try:
        repo = _open_repo(ctx)
        ref = _parse_ref(source, repo.node.node_id)
        entry = repo.find(Partition.SREP, ref.node_id, ref.local_id, ref.version)
        if entry is None:
            _missing(source)
        raw = read_source_csv(
            repo.get_bytes(entry.ref, Partition.SREP), entry.ref, entry.provenance
        )
        cfg = config_from_json(Path(config_file).read_bytes(), config_file)
        result = run_pipeline(raw, cfg, repo.node, base_local_id=base, version=out_version)
        entries = [repo.store_core(ds) for ds in result.datasets()]
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json(
            {
                "outputs": [
                    {"ref": e.to_json()["ref"], "content_hash": e.content_hash} for e in entries
                ]
            }
        )
    else:
        for e in entries:
            click.echo(f"{e.ref.kind.value}: {e.ref} ({e.content_hash[:12]})")


def _missing(source: str):
    from .errors import NotFoundError

    raise NotFoundError(f"source {source!r} is not collected")


@main.command()
@click.argument("ref_text", metavar="REF")
@click.option("--title", "titles", multiple=True, help="tag=text; repeatable.", required=True)
@click.option("--description", "descriptions", multiple=True, help="tag=text; repeatable.")
@click.option("--category", "categories", multiple=True)
@click.option("--license", "license_", default="CC-BY-4.0", show_default=True)
@click.option(
    "--policy",
    type=click.Choice([p.value for p in DownloadPolicy]),
    default=DownloadPolicy.AUTOMATIC.value,
    show_default=True,
)
@click.option("--derived-from", "derived", multiple=True, help="Source refs ([node/]local/vN); repeatable.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def distribute(ctx, ref_text: str, titles, descriptions, categories, license_: str, policy: str, derived, as_json: bool):
    """Promote a core dataset to the distribution partition with metadata."""
    try:
        repo = _open_repo(ctx)
        triple = _parse_ref(ref_text, repo.node.node_id)
        entry = repo.find(Partition.CREP, triple.node_id, triple.local_id, triple.version)
        if entry is None:
            _missing(ref_text)
        dataset = load_dataset(repo, entry.ref, Partition.CREP)
        derived_refs = []
        for text in derived:
            source = _parse_ref(text, repo.node.node_id)
            found = repo.find(Partition.SREP, source.node_id, source.local_id, source.version)
            derived_refs.append(found.ref if found else source)
        record = generate_metadata(
            dataset,
            repo.node,
            DownloadPolicy(policy),
            title=_parse_lang_map(titles, "--title"),
            description=_parse_lang_map(descriptions, "--description") or {"en": ""},
            categories=tuple(categories),
            license=license_,
            derived_from=tuple(derived_refs),
        )
        registry = _registry(repo)
        promoted = repo.promote_to_distribution(
            entry.ref, record, known_nodes=[p.node_id for p in registry.peers()]
        )
        for warning in promoted.promotion_warnings:
            click.echo(f"warning: {warning}", err=True)
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json(json.loads(formats.serialize_metadata(record)))
    else:
        click.echo(f"distributed {entry.ref} ({promoted.content_hash[:12]})")


@main.command(name="search")
@click.option("--text", default=None)
@click.option("--kind", "kinds", multiple=True, type=click.Choice([k.value for k in ContentKind]))
@click.option("--category", "categories", multiple=True)
@click.option("--language-tag", default=None)
@click.option("--page", default=1, type=int)
@click.option("--page-size", default=20, type=int)
@click.option("--peer", default=None, help="Query a registered peer instead of this node.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def search_cmd(ctx, text, kinds, categories, language_tag, page, page_size, peer, as_json):
    """Search distributed datasets, locally or on a peer."""
    try:
        repo = _open_repo(ctx)
        if peer is not None:
            registry = _registry(repo)
            base = registry.peer(peer).base_url
            params = [("page", page), ("page_size", page_size)]
            if text:
                params.append(("text", text))
            if language_tag:
                params.append(("language_tag", language_tag))
            params.extend(("kind", k) for k in kinds)
            params.extend(("category", c) for c in categories)
            reply = HttpTransport().get(f"{base}/api/v1/datasets", params=dict(params))
            if reply.status != 200:
                raise PeerUnreachableError(f"peer {peer} answered {reply.status}")
            payload = reply.json()
        else:
            query = SearchQuery(
                text=text,
                kinds=frozenset(ContentKind(k) for k in kinds),
                categories=frozenset(categories),
                language_tag=language_tag,
                page=page,
                page_size=page_size,
            )
            records = [repo.get_metadata(e.ref) for e in repo.list_entries(Partition.DREP)]
            results = search(records, query)
            from .formats.common import ref_to_json

            payload = {
                "items": [
                    {
                        "ref": ref_to_json(r.ref),
                        "title": dict(sorted(r.title.items())),
                        "kind": r.ref.kind.value,
                        "categories": list(r.categories),
                        "catalogue_url": catalogue_url(repo.node.base_url, r.ref),
                    }
                    for r in results.records
                ],
                "page": results.page,
                "page_size": results.page_size,
                "total": results.total,
            }
    except ValueError as exc:
        raise _fail(ParseError(str(exc)))
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json(payload)
    else:
        for item in payload["items"]:
            ref = item["ref"]
            title = next(iter(item["title"].values()), "")
            click.echo(
                f"{ref['node_id']}/{ref['local_id']}/v{ref['version']}  "
                f"{item['kind']:<12} {title}"
            )
        click.echo(f"total: {payload['total']}")


@main.command()
@click.argument("ref_text", metavar="NODE/LOCAL/vN")
@click.option("--token", default=None, help="Access token for request-policy datasets.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def fetch(ctx, ref_text: str, token: Optional[str], as_json: bool):
    """Download a peer dataset (hash-verified) into the source partition."""
    try:
        repo = _open_repo(ctx)
        ref = _parse_ref(ref_text, repo.node.node_id)
        client = FederationClient(repo, _registry(repo), HttpTransport())
        data, record = client.fetch_remote_dataset(ref, token=token)
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json(
            {
                "ref": json.loads(formats.serialize_metadata(record))["ref"],
                "content_hash": record.content_hash,
                "bytes": len(data),
            }
        )
    else:
        click.echo(f"fetched {record.ref} ({record.content_hash[:12]}, {len(data)} bytes)")


@main.group()
def peer():
    """Manage the peer registry."""


@peer.command(name="add")
@click.argument("descriptor_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def peer_add(ctx, descriptor_file: str, as_json: bool):
    try:
        repo = _open_repo(ctx)
        descriptor = node_from_json(json.loads(Path(descriptor_file).read_text(encoding="utf-8")))
        _registry(repo).add_peer(descriptor)
    except (MeshError, OSError, json.JSONDecodeError) as exc:
        if isinstance(exc, json.JSONDecodeError):
            raise _fail(ParseError(f"{descriptor_file}: {exc}"))
        raise _fail(exc)
    if as_json:
        _echo_json({"peer": node_to_json(descriptor)})
    else:
        click.echo(f"registered peer {descriptor.node_id} at {descriptor.base_url}")


@peer.command(name="remove")
@click.argument("node_id")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def peer_remove(ctx, node_id: str, as_json: bool):
    try:
        _registry(_open_repo(ctx)).remove_peer(node_id)
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json({"removed": node_id})
    else:
        click.echo(f"removed peer {node_id}")


@peer.command(name="list")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def peer_list(ctx, as_json: bool):
    try:
        repo = _open_repo(ctx)
        peers = _registry(repo).peers()
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json({"peers": [node_to_json(p) for p in peers]})
    else:
        for p in peers:
            click.echo(f"{p.node_id}  {p.base_url}  {p.name}")
        if not peers:
            click.echo("no registered peers")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True, type=int)
@click.pass_context
def serve(ctx, host: str, port: int):
    """Run the catalogue HTTP service until interrupted."""
    try:
        import uvicorn

        from .service import create_app

        app = create_app(resolve_repo_root(ctx.obj.get("repo")))
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def check(ctx, as_json: bool):
    """Verify repository integrity; nonzero exit when anything is off."""
    try:
        repo = _open_repo(ctx)
        report = repo.integrity_check()
    except (MeshError, OSError) as exc:
        raise _fail(exc)
    if as_json:
        _echo_json(
            {"issues": [{"code": i.code, "path": i.path, "message": i.message} for i in report.issues]}
        )
    else:
        for issue in report.issues:
            click.echo(str(issue))
        click.echo("ok" if report.ok else f"{len(report.issues)} problem(s) found")
    if not report.ok:
        raise click.exceptions.Exit(2)


if __name__ == "__main__":
    main()
