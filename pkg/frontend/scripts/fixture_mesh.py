"""Boot a live two-node fixture mesh for UI end-to-end tests.

Node A (unitn) serves the Italian walkthrough; node B (num) serves the
Mongolian one plus a cross-node graph composed over A's fetched knowledge
and language layers. B's ontology is request-policy so the access-request
flow can be exercised. Prints `READY <A-url> <B-url>` once both are up.
"""

from __future__ import annotations

import socket
import sys
import tempfile
import threading
import time
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO_ROOT / "tests"))

import uvicorn

from conftest import NUM_RAW, UNITN_RAW, num_config, unitn_config
from stratamesh.federation import FederationClient, HttpTransport, PeerRegistry
from stratamesh.model import ContentKind, DatasetRef, DownloadPolicy, NodeDescriptor
from stratamesh.pipeline import generate_metadata, read_source_csv, run_pipeline
from stratamesh.repository import Repository
from stratamesh.service import create_app


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def build_node(root, descriptor, raw_bytes, cfg, policies=None):
    repo = Repository.initialize(root, descriptor)
    source_ref = DatasetRef(descriptor.node_id, "university", 1, ContentKind.LOW_QUALITY)
    repo.ingest_source(raw_bytes, source_ref, ContentKind.LOW_QUALITY, "walkthrough export")
    raw = read_source_csv(raw_bytes, source_ref)
    result = run_pipeline(raw, cfg, descriptor)
    policies = policies or {}
    for ds in result.datasets():
        repo.store_core(ds)
        record = generate_metadata(
            ds, descriptor, policies.get(ds.ref.kind, DownloadPolicy.AUTOMATIC),
            {"en": f"{descriptor.node_id} university {ds.ref.kind.value}"},
            {"en": "walkthrough data", "it": "dati universitari", "mn": "их сургуулийн өгөгдөл"},
            categories=("education",), derived_from=(source_ref,),
        )
        repo.promote_to_distribution(ds.ref, record)
    return repo, result


def serve(root, port) -> threading.Thread:
    app = create_app(root)
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.02)
    return thread


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="mesh-e2e-"))
    port_a, port_b = free_port(), free_port()

    node_a = NodeDescriptor(
        "unitn", "University of Trento",
        {"en": "University data from Trento, Italy", "it": "Dati universitari di Trento"},
        f"http://127.0.0.1:{port_a}", "University of Trento",
    )
    node_b = NodeDescriptor(
        "num", "National University of Mongolia",
        {"en": "University data from Ulaanbaatar, Mongolia", "mn": "Их сургуулийн өгөгдөл"},
        f"http://127.0.0.1:{port_b}", "National University of Mongolia",
    )

    repo_a, result_a = build_node(workdir / "a", node_a, UNITN_RAW, unitn_config())
    serve(workdir / "a", port_a)

    repo_b, result_b = build_node(
        workdir / "b", node_b, NUM_RAW, num_config(),
        policies={ContentKind.KNOWLEDGE: DownloadPolicy.REQUEST},
    )
    registry_b = PeerRegistry("num", workdir / "b" / "peers.json")
    registry_b.add_peer(node_a)
    fed = FederationClient(repo_b, registry_b, HttpTransport())
    graph, record = fed.cross_node_compose(
        result_b.standardised,
        result_a.knowledge.ref,
        result_a.language.ref,
        node_b,
        DownloadPolicy.AUTOMATIC,
        {"en": "Cross-university graph", "mn": "Их сургуулиудын нэгдсэн граф"},
        {"en": "Mongolian rows typed by the Italian ontology"},
        categories=("education",),
        graph_ref=DatasetRef("num", "crossuni-graph", 1, ContentKind.GRAPH),
    )
    repo_b.store_core(graph)
    repo_b.promote_to_distribution(graph.ref, record, known_nodes=["unitn"])
    serve(workdir / "b", port_b)

    print(f"READY {node_a.base_url} {node_b.base_url}", flush=True)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()
