"""HTTP service for live elicitation sessions.

A human plays the latent entity: the engine poses one question at a time
(chosen by the configured policy), the human answers, and belief snapshots
over the target questions are exposed after every answer.  Sessions are
in-memory with an append-only JSON-lines event log per session.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from .catalog import QuestionCatalog
from .data import load_dataset
from .demo import demo_instance
from .infogain import eig_scores
from .model import entropy, fit_tabular
from .policy import MctsConfig, PolicyConfig, select_greedy, select_mcts, select_random, select_similarity
from .predictor import PredictiveModel, TabularPredictor
from .serialize import _canonicalize


@dataclass
class Session:
    id: str
    policy: PolicyConfig
    candidates: list[str]
    targets: list[str]
    history: list[tuple[str, int]] = field(default_factory=list)
    pending: str | None = None
    pending_diagnostics: dict | None = None
    status: str = "active"
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def remaining(self) -> list[str]:
        asked = {q for q, _ in self.history}
        return [q for q in self.candidates if q not in asked]


class SessionEngine:
    def __init__(self, catalog: QuestionCatalog, model: PredictiveModel,
                 log_dir: str | None = None):
        self.catalog = catalog
        self.model = model
        self.log_dir = Path(log_dir) if log_dir else None
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    def create(self, policy: PolicyConfig, n_candidates: int, n_targets: int, seed: int) -> Session:
        policy.validate()
        if n_candidates < 1 or n_targets < 1:
            raise ValueError("n_candidates and n_targets must be >= 1")
        ids = self.catalog.ids
        if n_candidates + n_targets > len(ids):
            raise ValueError(
                f"catalog has {len(ids)} questions; {n_candidates + n_targets} requested"
            )
        rng = np.random.default_rng(seed)
        picked = rng.choice(len(ids), size=n_candidates + n_targets, replace=False)
        session = Session(
            id=uuid.uuid4().hex,
            policy=policy,
            candidates=[ids[i] for i in picked[:n_candidates]],
            targets=[ids[i] for i in picked[n_candidates:]],
        )
        with self._registry_lock:
            self.sessions[session.id] = session
        self._log(session, {"type": "created", "candidates": session.candidates,
                            "targets": session.targets, "policy": policy.kind, "seed": seed})
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise KeyError(session_id) from None

    def _log(self, session: Session, event: dict) -> None:
        if self.log_dir:
            with open(self.log_dir / f"{session.id}.jsonl", "a") as fh:
                fh.write(json.dumps(_canonicalize(event), sort_keys=True) + "\n")

    def read_log(self, session: Session) -> list[dict]:
        if not self.log_dir:
            return []
        path = self.log_dir / f"{session.id}.jsonl"
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text().splitlines()]

    def next_question(self, session: Session) -> dict:
        with session.lock:
            if session.status != "active":
                raise LookupError(f"session is {session.status}")
            if session.pending is None:
                remaining = session.remaining
                if not remaining:
                    session.status = "exhausted"
                    raise LookupError("session is exhausted")
                history = tuple(session.history)
                diagnostics: dict = {}
                kind = session.policy.kind
                if kind == "random":
                    rng = np.random.default_rng([session.policy.seed, len(session.history)])
                    qid = select_random(remaining, rng)
                elif kind == "similarity":
                    qid = select_similarity(remaining, session.targets, self.catalog)
                elif kind == "greedy":
                    scores = eig_scores(self.model, history, session.targets, remaining)
                    qid, _ = select_greedy(self.model, history, session.targets, remaining)
                    diagnostics = {"eig": scores}
                else:
                    qid, scores = select_mcts(
                        self.model, history, session.targets, remaining,
                        session.policy.mcts, rng_seed=session.policy.seed + len(session.history),
                    )
                    diagnostics = {"mcts_mean_reward": scores}
                session.pending = qid
                session.pending_diagnostics = diagnostics
                self._log(session, {"type": "posed", "question": qid,
                                    "step": len(session.history), "diagnostics": diagnostics})
            q = self.catalog.question(session.pending)
            return _canonicalize({
                "session": session.id,
                "step": len(session.history),
                "question": {"id": q.id, "text": q.text, "choices": q.choices},
                "diagnostics": session.pending_diagnostics or {},
                "remaining": len(session.remaining),
            })

    def submit_answer(self, session: Session, answer: int) -> dict:
        with session.lock:
            if session.status != "active":
                raise LookupError(f"session is {session.status}")
            if session.pending is None:
                raise ValueError("no pending question; call next first")
            a = self.catalog.alphabet_size(session.pending)
            if not isinstance(answer, int) or not 0 <= answer < a:
                raise ValueError(f"answer index must be in [0, {a})")
            session.history.append((session.pending, answer))
            self._log(session, {"type": "answer", "question": session.pending,
                                "answer": answer, "step": len(session.history) - 1})
            session.pending = None
            session.pending_diagnostics = None
            if not session.remaining:
                session.status = "exhausted"
            return self.belief_snapshot(session)

    def belief_snapshot(self, session: Session) -> dict:
        history = tuple(session.history)
        per_target = {}
        for qid in session.targets:
            probs = np.asarray(self.model.predictive(history, qid), dtype=float)
            per_target[qid] = {"probs": probs.tolist(), "entropy": entropy(probs)}
        joint = self.model.joint_entropy(history, session.targets)
        return _canonicalize({
            "session": session.id,
            "step": len(session.history),
            "status": session.status,
            "targets": per_target,
            "joint_entropy": joint,
            "history": [[q, a] for q, a in session.history],
        })


class CreateRequest(BaseModel):
    policy: str = "greedy"
    n_candidates: int = 20
    n_targets: int = 5
    seed: int = 0
    mcts_top_k: int = 2
    mcts_n_rollouts: int = 8
    mcts_depth: int = 3


class AnswerRequest(BaseModel):
    answer: int


def create_app(engine: SessionEngine, ui_dir: str | None = None):
    from fastapi import FastAPI, HTTPException

    app = FastAPI(title="elicit session service")
    app.state.engine = engine

    def _session(session_id: str) -> Session:
        try:
            return engine.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.post("/sessions")
    def create_session(req: CreateRequest):
        policy = PolicyConfig(
            kind=req.policy, seed=req.seed,
            mcts=MctsConfig(req.mcts_top_k, req.mcts_n_rollouts, req.mcts_depth),
        )
        try:
            session = engine.create(policy, req.n_candidates, req.n_targets, req.seed)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"id": session.id, "candidates": session.candidates,
                "targets": session.targets, "policy": policy.kind}

    @app.get("/sessions/{session_id}/next")
    def next_question(session_id: str):
        session = _session(session_id)
        try:
            return engine.next_question(session)
        except LookupError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/sessions/{session_id}/answer")
    def submit_answer(session_id: str, req: AnswerRequest):
        session = _session(session_id)
        try:
            return engine.submit_answer(session, req.answer)
        except LookupError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/sessions/{session_id}/belief")
    def belief(session_id: str):
        return engine.belief_snapshot(_session(session_id))

    @app.get("/sessions/{session_id}/log")
    def log(session_id: str):
        return {"events": engine.read_log(_session(session_id))}

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


def engine_from_env() -> SessionEngine:
    """Build an engine from environment configuration.

    ELICIT_DATASET: dataset JSON path (demo instance when unset)
    ELICIT_SMOOTHING: fit smoothing (default 1.0)
    ELICIT_LOG_DIR: session event-log directory
    """
    dataset_path = os.environ.get("ELICIT_DATASET")
    if dataset_path:
        dataset = load_dataset(dataset_path)
        table = fit_tabular(
            dataset.catalog, dataset.records(),
            float(os.environ.get("ELICIT_SMOOTHING", "1.0")),
        )
        catalog = dataset.catalog
    else:
        catalog, table = demo_instance(("qDet2", "qSkew2", "qNoise2"))
    model = TabularPredictor(table, catalog)
    return SessionEngine(catalog, model, os.environ.get("ELICIT_LOG_DIR"))
