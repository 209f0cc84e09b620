"""HTTP service: routes, error mapping, per-session serialization, restart."""

import json
import threading

import pytest
from fastapi.testclient import TestClient

from sramda.server import RiskService, create_app
from sramda.store import compute_stats, load_seed_kb, save_kb

from conftest import make_kb, make_record
from test_assessment import project

PROJECT = project().to_dict()


@pytest.fixture()
def service(tmp_path):
    return RiskService(kb_path=None, data_dir=str(tmp_path / "data"))


@pytest.fixture()
def client(service):
    return TestClient(create_app(service))


def start_session(client) -> str:
    response = client.post("/api/sessions", json=PROJECT)
    assert response.status_code == 201
    return response.json()["session"]["id"]


class TestKbRoutes:
    def test_stats_matches_library(self, client):
        response = client.get("/api/kb/stats")
        assert response.status_code == 200
        assert response.json() == compute_stats(load_seed_kb()).to_dict()

    def test_attack_detail_and_404(self, client):
        assert client.get("/api/kb/attacks/eclipse-attack").json()["name"] == "Eclipse Attack"
        assert client.get("/api/kb/attacks/ghost-attack").status_code == 404

    def test_layer_filter_on_trio_kb(self, tmp_path):
        trio = make_kb(
            make_record("Double Spending Attack"),
            make_record("Eclipse Attack"),
            make_record("Long Range Attack", layers=[list(load_seed_kb().get("long-range-attack").impacted_layers)[0]]),
        )
        kb_file = tmp_path / "trio.jsonl"
        kb_file.write_bytes(save_kb(trio))
        service = RiskService(kb_path=str(kb_file), data_dir=str(tmp_path / "data"))
        client = TestClient(create_app(service))
        response = client.get("/api/kb/attacks", params={"layer": "consensus"})
        assert [r["id"] for r in response.json()] == ["long-range-attack"]

    def test_bad_layer_param_is_400(self, client):
        assert client.get("/api/kb/attacks", params={"layer": "hardware"}).status_code == 400

    def test_graph_routes(self, client):
        related = client.get("/api/kb/graph/eclipse-attack/related")
        assert "sybil-attack" in related.json()
        closure = client.get("/api/kb/graph/eclipse-attack/contributes-closure")
        assert "splitting-mining-power-51-attack" in closure.json()
        assert client.get("/api/kb/graph/ghost/related").status_code == 404

    def test_corrupt_kb_refuses_to_start(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"schema_version": 1, "provenance": "x"}\n{broken\n')
        from sramda.errors import ParseError

        with pytest.raises(ParseError, match="line 2"):
            RiskService(kb_path=str(bad), data_dir=str(tmp_path / "data"))


class TestSessionRoutes:
    def test_create_and_get(self, client):
        sid = start_session(client)
        doc = client.get(f"/api/sessions/{sid}").json()
        assert doc["session"]["current_step"] == "motivations"
        assert client.get("/api/sessions/nope").status_code == 404

    def test_error_mapping(self, client):
        sid = start_session(client)
        # step-order violation -> 409
        response = client.post(f"/api/sessions/{sid}/rank", json={"decisions": []})
        assert response.status_code == 409
        # validation -> 422
        response = client.post("/api/sessions", json={**PROJECT, "scope_statement": " "})
        assert response.status_code == 422
        # parse -> 400
        response = client.post(
            f"/api/sessions/{sid}/motivations",
            content=b"{broken",
            headers={"content-type": "application/json"},
        )
        assert response.status_code == 400
        # unknown body fields -> 400
        response = client.post(f"/api/sessions/{sid}/analysis", json={"attack": "x"})
        assert response.status_code == 400

    def test_full_flow_over_http(self, client):
        sid = start_session(client)
        post = lambda path, body=None: client.post(f"/api/sessions/{sid}/{path}", json=body)
        assert post("motivations", {"id": "cash-out", "description": "money", "category": "monetary"}).status_code == 200
        assert post("annotations", {"motivation_id": "cash-out", "layers": ["network"], "assets": ["exchange"]}).status_code == 200
        doc = post("identify").json()
        assert doc["session"]["current_step"] == "identify"
        ids = [r["attack_id"] for r in doc["session"]["risks"]]
        assert ids == ["double-spending-attack"]
        assert post("analysis", {"attack_id": "double-spending-attack", "scenario": "double spend at the exchange"}).status_code == 200
        assert post("rank", {"decisions": [{"attack_id": "double-spending-attack", "decision": "confirmed", "rank": 1}]}).status_code == 200
        assert post("countermeasures", {
            "attack_id": "double-spending-attack",
            "countermeasures": [{"text": "stronger verification", "references": []}],
        }).status_code == 200
        done = post("finalize").json()
        assert done["session"]["recommendation"]["top_assets"] == ["Network", "exchange"]
        report = client.get(f"/api/sessions/{sid}/report")
        assert report.status_code == 200
        assert report.headers["content-type"].startswith("text/markdown")
        assert "Most-harmed asset(s)" in report.text

    def test_new_risk_swaps_kb(self, client):
        sid = start_session(client)
        client.post(f"/api/sessions/{sid}/motivations", json={"id": "cash-out", "description": "m", "category": "monetary"})
        client.post(f"/api/sessions/{sid}/annotations", json={"motivation_id": "cash-out", "layers": ["network"], "assets": ["exchange"]})
        client.post(f"/api/sessions/{sid}/identify")
        record = make_record("Fresh Attack").to_dict()
        response = client.post(
            f"/api/sessions/{sid}/new-risk",
            json={"record": record, "matched_motivations": ["cash-out"]},
        )
        assert response.status_code == 200
        assert client.get("/api/kb/attacks/fresh-attack").status_code == 200
        # duplicate registration -> 422 validation error
        response = client.post(
            f"/api/sessions/{sid}/new-risk",
            json={"record": record, "matched_motivations": ["cash-out"]},
        )
        assert response.status_code == 422


class TestConcurrencyAndRestart:
    def test_concurrent_motivations_serialized(self, client):
        sid = start_session(client)
        n = 8
        barrier = threading.Barrier(n)
        statuses = []

        def worker(i):
            barrier.wait()
            response = client.post(
                f"/api/sessions/{sid}/motivations",
                json={"id": f"motive-{i}", "description": f"m{i}", "category": "monetary"},
            )
            statuses.append(response.status_code)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(n)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert statuses == [200] * n
        doc = client.get(f"/api/sessions/{sid}").json()
        motives = [m["id"] for m in doc["session"]["motivations"]]
        assert sorted(motives) == sorted(f"motive-{i}" for i in range(n))
        seqs = [e["seq"] for e in doc["audit_log"]]
        assert seqs == list(range(1, n + 2))

    def test_sessions_survive_restart(self, tmp_path, client, service):
        sid = start_session(client)
        client.post(
            f"/api/sessions/{sid}/motivations",
            json={"id": "cash-out", "description": "m", "category": "monetary"},
        )
        before = client.get(f"/api/sessions/{sid}").json()

        reborn = RiskService(kb_path=None, data_dir=str(service._data_dir))
        client2 = TestClient(create_app(reborn))
        after = client2.get(f"/api/sessions/{sid}").json()
        assert after == before

    def test_grown_kb_survives_restart(self, tmp_path):
        data_dir = str(tmp_path / "data")
        service = RiskService(kb_path=None, data_dir=data_dir)
        client = TestClient(create_app(service))
        sid = start_session(client)
        client.post(f"/api/sessions/{sid}/motivations", json={"id": "cash-out", "description": "m", "category": "monetary"})
        client.post(f"/api/sessions/{sid}/annotations", json={"motivation_id": "cash-out", "layers": ["network"], "assets": ["exchange"]})
        client.post(f"/api/sessions/{sid}/identify")
        record = make_record("Persisted Attack").to_dict()
        client.post(f"/api/sessions/{sid}/new-risk", json={"record": record, "matched_motivations": ["cash-out"]})

        reborn = RiskService(kb_path=None, data_dir=data_dir)
        assert "persisted-attack" in reborn.kb
