import math

import pytest
from starlette.testclient import TestClient

from elicit.demo import demo_instance
from elicit.policy import PolicyConfig
from elicit.predictor import TabularPredictor
from elicit.service import SessionEngine, create_app, engine_from_env

LN2 = math.log(2.0)


def make_engine(log_dir=None):
    catalog, table = demo_instance(("qDet2", "qSkew2", "qNoise2"))
    return SessionEngine(catalog, TabularPredictor(table, catalog), log_dir)


@pytest.fixture
def client(tmp_path):
    engine = make_engine(str(tmp_path / "logs"))
    return TestClient(create_app(engine))


def start(client, **overrides):
    body = {"policy": "greedy", "n_candidates": 3, "n_targets": 2, "seed": 0}
    body.update(overrides)
    response = client.post("/sessions", json=body)
    assert response.status_code == 200
    return response.json()


class TestEngine:
    def test_pools_disjoint(self):
        engine = make_engine()
        s = engine.create(PolicyConfig("greedy"), 3, 2, seed=1)
        assert len(s.candidates) == 3 and len(s.targets) == 2
        assert not set(s.candidates) & set(s.targets)

    def test_next_is_idempotent(self):
        engine = make_engine()
        s = engine.create(PolicyConfig("greedy"), 3, 2, seed=1)
        first = engine.next_question(s)
        second = engine.next_question(s)
        assert first == second

    def test_answer_advances(self):
        engine = make_engine()
        s = engine.create(PolicyConfig("greedy"), 3, 2, seed=1)
        posed = engine.next_question(s)
        snapshot = engine.submit_answer(s, 0)
        assert snapshot["step"] == 1
        assert snapshot["history"] == [[posed["question"]["id"], 0]]

    def test_answer_without_pending(self):
        engine = make_engine()
        s = engine.create(PolicyConfig("greedy"), 3, 2, seed=1)
        with pytest.raises(ValueError, match="pending"):
            engine.submit_answer(s, 0)

    def test_exhaustion(self):
        engine = make_engine()
        s = engine.create(PolicyConfig("random"), 2, 2, seed=1)
        for _ in range(2):
            engine.next_question(s)
            engine.submit_answer(s, 0)
        assert s.status == "exhausted"
        with pytest.raises(LookupError, match="exhausted"):
            engine.next_question(s)

    def test_oversized_request(self):
        engine = make_engine()
        with pytest.raises(ValueError, match="requested"):
            engine.create(PolicyConfig("greedy"), 5, 2, seed=0)


class TestApi:
    def test_full_greedy_round(self, client):
        created = start(client)
        sid = created["id"]

        posed = client.get(f"/sessions/{sid}/next").json()
        assert posed["question"]["id"] in created["candidates"]
        assert "eig" in posed["diagnostics"]

        snapshot = client.post(f"/sessions/{sid}/answer", json={"answer": 0}).json()
        assert snapshot["step"] == 1
        assert set(snapshot["targets"]) == set(created["targets"])
        for t in snapshot["targets"].values():
            assert sum(t["probs"]) == pytest.approx(1.0, abs=1e-9)
            # snapshots round floats to 10 significant digits
            assert 0.0 <= t["entropy"] <= LN2 + 1e-9

    def test_belief_before_any_answer(self, client):
        sid = start(client)["id"]
        snapshot = client.get(f"/sessions/{sid}/belief").json()
        assert snapshot["step"] == 0 and snapshot["history"] == []

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/next").status_code == 404

    def test_bad_answer_422(self, client):
        sid = start(client)["id"]
        client.get(f"/sessions/{sid}/next")
        assert client.post(f"/sessions/{sid}/answer", json={"answer": 9}).status_code == 422

    def test_answer_without_pending_422(self, client):
        sid = start(client)["id"]
        assert client.post(f"/sessions/{sid}/answer", json={"answer": 0}).status_code == 422

    def test_exhausted_409(self, client):
        sid = start(client, n_candidates=1, n_targets=1)["id"]
        client.get(f"/sessions/{sid}/next")
        client.post(f"/sessions/{sid}/answer", json={"answer": 0})
        assert client.get(f"/sessions/{sid}/next").status_code == 409

    def test_oversized_create_422(self, client):
        response = client.post(
            "/sessions", json={"n_candidates": 10, "n_targets": 10}
        )
        assert response.status_code == 422

    def test_event_log(self, client):
        sid = start(client)["id"]
        client.get(f"/sessions/{sid}/next")
        client.post(f"/sessions/{sid}/answer", json={"answer": 1})
        events = client.get(f"/sessions/{sid}/log").json()["events"]
        assert [e["type"] for e in events] == ["created", "posed", "answer"]
        assert events[2]["answer"] == 1

    def test_mcts_policy_diagnostics(self, client):
        sid = start(client, policy="mcts")["id"]
        posed = client.get(f"/sessions/{sid}/next").json()
        assert "mcts_mean_reward" in posed["diagnostics"]

    def test_greedy_poses_informative_question(self, client):
        # whichever candidates were drawn, greedy never poses a pure-noise
        # question while an informative one remains
        sid = start(client, seed=3)["id"]
        created = client.get(f"/sessions/{sid}/belief").json()
        posed = client.get(f"/sessions/{sid}/next").json()
        scores = posed["diagnostics"]["eig"]
        best = max(scores.values())
        assert scores[posed["question"]["id"]] == pytest.approx(best, abs=1e-9)


class TestEngineFromEnv:
    def test_demo_fallback(self, monkeypatch):
        for var in ("ELICIT_DATASET", "ELICIT_SMOOTHING", "ELICIT_LOG_DIR"):
            monkeypatch.delenv(var, raising=False)
        engine = engine_from_env()
        assert len(engine.catalog) == 6

    def test_dataset_env(self, monkeypatch, tmp_path):
        from elicit.data import SyntheticConfig, generate_synthetic, save_dataset

        path = tmp_path / "ds.json"
        save_dataset(generate_synthetic(SyntheticConfig(n_entities=12, n_questions=5)), path)
        monkeypatch.setenv("ELICIT_DATASET", str(path))
        monkeypatch.setenv("ELICIT_LOG_DIR", str(tmp_path / "logs"))
        engine = engine_from_env()
        assert len(engine.catalog) == 5
        s = engine.create(PolicyConfig("greedy"), 2, 2, seed=0)
        engine.next_question(s)
        assert (tmp_path / "logs" / f"{s.id}.jsonl").exists()
