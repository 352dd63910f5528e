"""Record a scripted live session against the real service for the
frontend tests.

Drives the demo instance through the same HTTP sequence the browser
client performs (create, initial belief, next, then answer/belief/next
per round), captures every exchange verbatim, and appends the engine's
event log.  Output: frontend/tests/fixtures/r1_greedy_session.json.
"""

import json
import tempfile
from pathlib import Path

from starlette.testclient import TestClient

from elicit.service import SessionEngine, create_app
from elicit.demo import demo_instance
from elicit.predictor import TabularPredictor

POLICY = "greedy"
SEED = 1
N_CANDIDATES = 3
N_TARGETS = 3
ANSWERS = [0, 0, 1]

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"


def main():
    catalog, table = demo_instance(("qDet2", "qSkew2", "qNoise2"))
    with tempfile.TemporaryDirectory() as log_dir:
        engine = SessionEngine(catalog, TabularPredictor(table, catalog), log_dir)
        client = TestClient(create_app(engine))
        exchanges = []

        def call(method, path, body=None):
            response = client.request(method, path, json=body)
            exchanges.append({
                "method": method,
                "path": path,
                "request": body,
                "status": response.status_code,
                "body": response.text,
            })
            return response

        created = call("POST", "/sessions", {
            "policy": POLICY, "seed": SEED,
            "n_candidates": N_CANDIDATES, "n_targets": N_TARGETS,
        }).json()
        sid = created["id"]
        call("GET", f"/sessions/{sid}/belief")
        call("GET", f"/sessions/{sid}/next")
        for answer in ANSWERS:
            call("POST", f"/sessions/{sid}/answer", {"answer": answer})
            call("GET", f"/sessions/{sid}/belief")
            call("GET", f"/sessions/{sid}/next")

        log = client.get(f"/sessions/{sid}/log").json()["events"]

    OUT.mkdir(parents=True, exist_ok=True)
    out_path = OUT / "r1_greedy_session.json"
    out_path.write_text(json.dumps({
        "session_id": sid,
        "create": {"policy": POLICY, "seed": SEED,
                   "n_candidates": N_CANDIDATES, "n_targets": N_TARGETS},
        "answers": ANSWERS,
        "exchanges": exchanges,
        "log": log,
    }, indent=2))
    print(f"wrote {out_path} ({len(exchanges)} exchanges, {len(log)} log events)")


if __name__ == "__main__":
    main()
