"""Catalogue API conformance: the three GET levels, search behaviour,
policy-gated download, and the access-request state machine."""

from __future__ import annotations

import hashlib
import threading

import pytest
from fastapi.testclient import TestClient

from stratamesh.access import RequestStore
from stratamesh.federation import PeerRegistry
from stratamesh.model import ContentKind, DownloadPolicy
from stratamesh.pipeline import generate_metadata
from stratamesh.repository import Partition, Repository
from stratamesh.service import build_app


@pytest.fixture()
def node_setup(tmp_path, walkthrough, unitn_node, unitn_source):
    repo = Repository.initialize(tmp_path / "node", unitn_node)
    repo.ingest_source(b"raw\n", unitn_source.ref, ContentKind.LOW_QUALITY)
    policies = {ContentKind.KNOWLEDGE: DownloadPolicy.REQUEST}
    for ds in walkthrough.datasets():
        repo.store_core(ds)
        record = generate_metadata(
            ds, unitn_node, policies.get(ds.ref.kind, DownloadPolicy.AUTOMATIC),
            {"en": f"university {ds.ref.kind.value}", "it": f"{ds.ref.kind.value} universitario"},
            {"en": "walkthrough data", "it": "dati dei professori"},
            categories=("education",), derived_from=(unitn_source.ref,),
        )
        repo.promote_to_distribution(ds.ref, record)
    registry = PeerRegistry(unitn_node.node_id, tmp_path / "node" / "peers.json")
    store = RequestStore(tmp_path / "node" / "requests.json")
    return repo, registry, store


@pytest.fixture()
def client(node_setup):
    repo, registry, store = node_setup
    return TestClient(build_app(repo, registry, store))


class TestLanding:
    def test_fresh_node_counts_zero(self, tmp_path, unitn_node):
        repo = Repository.initialize(tmp_path / "fresh", unitn_node)
        registry = PeerRegistry("unitn", tmp_path / "fresh" / "peers.json")
        store = RequestStore(tmp_path / "fresh" / "requests.json")
        reply = TestClient(build_app(repo, registry, store)).get("/api/v1/node")
        assert reply.status_code == 200
        assert set(reply.json()["counts"].values()) == {0}

    def test_counts_after_distribution(self, client):
        counts = client.get("/api/v1/node").json()["counts"]
        assert counts == {"standardised": 1, "language": 1, "knowledge": 1, "graph": 1}

    def test_counts_equal_unfiltered_list_total(self, client):
        counts = client.get("/api/v1/node").json()["counts"]
        total = client.get("/api/v1/datasets").json()["total"]
        assert sum(counts.values()) == total


class TestListEndpoint:
    def test_text_match_in_italian_description(self, client):
        reply = client.get("/api/v1/datasets", params={"text": "professori"})
        assert reply.json()["total"] == 4

    def test_core_only_content_is_never_listed(self, tmp_path, walkthrough, unitn_node):
        repo = Repository.initialize(tmp_path / "core-only", unitn_node)
        for ds in walkthrough.datasets():
            repo.store_core(ds)  # stored but not distributed
        client = TestClient(
            build_app(
                repo,
                PeerRegistry("unitn", repo.root / "peers.json"),
                RequestStore(repo.root / "requests.json"),
            )
        )
        assert client.get("/api/v1/datasets").json()["total"] == 0
        assert client.get("/api/v1/datasets/unitn/university-graph/1").status_code == 404

    def test_kind_filter(self, client):
        reply = client.get("/api/v1/datasets", params={"kind": "language"})
        items = reply.json()["items"]
        assert len(items) == 1
        assert items[0]["kind"] == "language"

    def test_two_token_ranking(self, client):
        reply = client.get("/api/v1/datasets", params={"text": "university graph"})
        items = reply.json()["items"]
        assert items[0]["kind"] == "graph"

    def test_malformed_parameter_names_field(self, client):
        reply = client.get("/api/v1/datasets", params={"page": "NaN"})
        assert reply.status_code == 400
        assert "page" in reply.json()["error"]["message"]

    def test_page_size_bounds(self, client):
        reply = client.get("/api/v1/datasets", params={"page_size": 101})
        assert reply.status_code == 400

    def test_unknown_kind_rejected(self, client):
        reply = client.get("/api/v1/datasets", params={"kind": "blob"})
        assert reply.status_code == 400
        assert "kind" in reply.json()["error"]["message"]

    def test_items_carry_catalogue_urls(self, client):
        items = client.get("/api/v1/datasets").json()["items"]
        for item in items:
            assert item["catalogue_url"].startswith("https://unitn.example/api/v1/datasets/")


class TestDetailEndpoint:
    def test_graph_detail_links_to_sources(self, client, walkthrough):
        reply = client.get("/api/v1/datasets/unitn/university-graph/1")
        assert reply.status_code == 200
        links = reply.json()["links"]["composed_of"]
        assert len(links) == 3
        kinds = {link["ref"]["kind"] for link in links}
        assert kinds == {"standardised", "language", "knowledge"}
        for link in links:
            assert link["catalogue_url"].startswith("https://unitn.example/api/v1/datasets/unitn/")

    def test_local_link_urls_resolve(self, client):
        links = client.get("/api/v1/datasets/unitn/university-graph/1").json()["links"]
        for link in links["composed_of"]:
            path = link["catalogue_url"].removeprefix("https://unitn.example")
            assert client.get(path).status_code == 200

    def test_knowledge_links_to_language(self, client, walkthrough):
        links = client.get("/api/v1/datasets/unitn/university-onto/1").json()["links"]
        (lang,) = links["uses_language"]
        assert lang["ref"]["local_id"] == walkthrough.language.ref.local_id

    def test_unknown_version_is_404(self, client):
        reply = client.get("/api/v1/datasets/unitn/university-graph/99")
        assert reply.status_code == 404
        assert reply.json()["error"]["code"] == "not_found"

    def test_record_matches_stored_metadata(self, client, node_setup, walkthrough):
        repo, _, _ = node_setup
        from stratamesh import formats

        body = client.get("/api/v1/datasets/unitn/university-lang/1").json()
        stored = repo.get_metadata(walkthrough.language.ref)
        assert formats.metadata_from_document(body["record"]) == stored


class TestDownload:
    def test_automatic_download_with_hash_header(self, client):
        reply = client.get("/api/v1/datasets/unitn/university-graph/1/download")
        assert reply.status_code == 200
        digest = hashlib.sha256(reply.content).hexdigest()
        assert reply.headers["X-Content-SHA256"] == digest
        detail = client.get("/api/v1/datasets/unitn/university-graph/1").json()
        assert detail["record"]["content_hash"] == digest

    def test_media_type_for_turtle(self, client):
        reply = client.get("/api/v1/datasets/unitn/university-graph/1/download")
        assert reply.headers["content-type"].startswith("text/turtle")

    def test_request_policy_blocks_with_instructions(self, client):
        reply = client.get("/api/v1/datasets/unitn/university-onto/1/download")
        assert reply.status_code == 403
        message = reply.json()["error"]["message"]
        assert "/api/v1/datasets/unitn/university-onto/1/requests" in message

    def test_unknown_ref_is_404(self, client):
        assert client.get("/api/v1/datasets/unitn/ghost/1/download").status_code == 404


class TestAccessRequests:
    def _request(self, client):
        reply = client.post(
            "/api/v1/datasets/unitn/university-onto/1/requests",
            json={"contact": "researcher@num.example", "justification": "course mapping"},
        )
        assert reply.status_code == 201
        return reply.json()

    def test_request_on_automatic_dataset_conflicts(self, client):
        reply = client.post(
            "/api/v1/datasets/unitn/university-graph/1/requests",
            json={"contact": "x@example.org"},
        )
        assert reply.status_code == 409

    def test_pending_status_visible_without_token(self, client):
        request = self._request(client)
        view = client.get(f"/api/v1/requests/{request['request_id']}").json()
        assert view["status"] == "pending"
        assert "token" not in view

    def test_approve_issues_single_use_token(self, client):
        request = self._request(client)
        approved = client.post(f"/api/v1/admin/requests/{request['request_id']}/approve").json()
        token = approved["token"]
        first = client.get(
            "/api/v1/datasets/unitn/university-onto/1/download", params={"token": token}
        )
        assert first.status_code == 200
        second = client.get(
            "/api/v1/datasets/unitn/university-onto/1/download", params={"token": token}
        )
        assert second.status_code == 403

    def test_denied_request_token_never_works(self, client):
        request = self._request(client)
        denied = client.post(f"/api/v1/admin/requests/{request['request_id']}/deny").json()
        assert denied["status"] == "denied"
        reply = client.get(
            "/api/v1/datasets/unitn/university-onto/1/download", params={"token": "whatever"}
        )
        assert reply.status_code == 403

    def test_denied_requester_may_reapply(self, client):
        first = self._request(client)
        client.post(f"/api/v1/admin/requests/{first['request_id']}/deny")
        second = self._request(client)
        assert second["request_id"] != first["request_id"]

    def test_token_is_dataset_scoped(self, client, node_setup, walkthrough, unitn_node):
        request = self._request(client)
        token = client.post(f"/api/v1/admin/requests/{request['request_id']}/approve").json()["token"]
        reply = client.get(
            "/api/v1/datasets/unitn/university-graph/1/download", params={"token": token}
        )
        # automatic dataset ignores tokens; but the token must not be spendable elsewhere
        assert reply.status_code == 200
        spend = client.get(
            "/api/v1/datasets/unitn/university-onto/1/download", params={"token": token}
        )
        assert spend.status_code == 200  # still unspent for its own dataset

    def test_concurrent_double_spend_has_exactly_one_winner(self, client):
        request = self._request(client)
        token = client.post(f"/api/v1/admin/requests/{request['request_id']}/approve").json()["token"]
        results = []
        barrier = threading.Barrier(8)

        def spend():
            barrier.wait()
            reply = client.get(
                "/api/v1/datasets/unitn/university-onto/1/download", params={"token": token}
            )
            results.append(reply.status_code)

        threads = [threading.Thread(target=spend) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results).count(200) == 1
        assert all(code in (200, 403) for code in results)

    def test_approve_twice_rejected(self, client):
        request = self._request(client)
        client.post(f"/api/v1/admin/requests/{request['request_id']}/approve")
        reply = client.post(f"/api/v1/admin/requests/{request['request_id']}/approve")
        assert reply.status_code == 403

    def test_requests_persist_across_restart(self, client, node_setup):
        repo, registry, _ = node_setup
        request = self._request(client)
        reloaded = RequestStore(repo.root / "requests.json")
        assert reloaded.get(request["request_id"]).contact == "researcher@num.example"
