"""Adapter exposing a remote token-logprob endpoint through the same
predictive-model contract as the tabular surrogate.

Wire contract (any inference server can be shimmed to it)::

    POST <endpoint>  {"prompt": str, "continuations": [str]}
    ->               {"logprobs": [float]}

The prompt is the history rendered as one question/answer transcript with
explicit "Q:" / "A:" delimiters; continuations are the candidate answer
strings for the current question.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from .catalog import History, QuestionCatalog
from .predictor import PredictiveModel


class LogprobRequest(BaseModel):
    prompt: str
    continuations: list[str]

TEMPLATE_QA_V1 = "qa-v1"


class GatewayUnavailableError(RuntimeError):
    pass


class GatewayProtocolError(RuntimeError):
    pass


@dataclass
class RemoteModelConfig:
    endpoint: str
    template: str = TEMPLATE_QA_V1
    timeout: float = 10.0
    max_retries: int = 2
    cache_path: str | None = None

    def validate(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.template != TEMPLATE_QA_V1:
            raise ValueError(f"unknown prompt template {self.template!r}")


def render_prompt(catalog: QuestionCatalog, history: History, question: str) -> tuple[str, list[str]]:
    parts = []
    for qid, answer in history:
        q = catalog.question(qid)
        parts.append(f"Q: {q.text}\nA: {q.choices[answer]}\n")
    q = catalog.question(question)
    parts.append(f"Q: {q.text}\nA:")
    return "".join(parts), [f" {c}" for c in q.choices]


def parse_prompt(catalog: QuestionCatalog, prompt: str) -> tuple[History, str]:
    """Invert :func:`render_prompt`.  Requires question texts unique."""
    by_text = {}
    for q in catalog:
        if q.text in by_text:
            raise GatewayProtocolError(f"question text {q.text!r} is not unique")
        by_text[q.text] = q
    chunks = prompt.split("Q: ")
    if not prompt.startswith("Q: ") or len(chunks) < 2:
        raise GatewayProtocolError("prompt does not follow the qa-v1 template")
    steps = []
    for chunk in chunks[1:-1]:
        text, _, rest = chunk.partition("\nA: ")
        q = by_text.get(text)
        if q is None:
            raise GatewayProtocolError(f"unknown question text {text!r}")
        label = rest.rstrip("\n")
        if label not in q.choices:
            raise GatewayProtocolError(f"unknown answer label {label!r} for {q.id!r}")
        steps.append((q.id, q.choices.index(label)))
    text, _, tail = chunks[-1].partition("\nA:")
    q = by_text.get(text)
    if q is None or tail != "":
        raise GatewayProtocolError("malformed final question in prompt")
    return tuple(steps), q.id


def _default_transport(endpoint: str, payload: dict, timeout: float) -> dict:
    import httpx

    response = httpx.post(endpoint, json=payload, timeout=timeout)
    response.raise_for_status()
    return response.json()


class RemotePredictor(PredictiveModel):
    """Predictive model backed by a logprob endpoint, with a response
    cache keyed by (template, rendered prompt)."""

    def __init__(self, config: RemoteModelConfig, catalog: QuestionCatalog, transport=None):
        super().__init__(catalog)
        config.validate()
        self.config = config
        self._transport = transport or _default_transport
        self.network_calls = 0
        self._cache: dict[str, list[float]] = {}
        if config.cache_path and Path(config.cache_path).exists():
            self._cache = json.loads(Path(config.cache_path).read_text())

    def _cache_key(self, prompt: str) -> str:
        digest = hashlib.sha256(prompt.encode()).hexdigest()
        return f"{self.config.template}:{digest}"

    def _persist(self):
        if self.config.cache_path:
            Path(self.config.cache_path).write_text(json.dumps(self._cache, sort_keys=True))

    def predictive(self, history: History, question: str) -> np.ndarray:
        prompt, continuations = render_prompt(self.catalog, history, question)
        key = self._cache_key(prompt)
        logprobs = self._cache.get(key)
        if logprobs is None:
            payload = {"prompt": prompt, "continuations": continuations}
            last_error = None
            for _ in range(self.config.max_retries + 1):
                try:
                    reply = self._transport(self.config.endpoint, payload, self.config.timeout)
                    break
                except Exception as exc:  # network or server failure; retry
                    last_error = exc
            else:
                raise GatewayUnavailableError(
                    f"endpoint {self.config.endpoint!r} unavailable: {last_error}"
                ) from last_error
            self.network_calls += 1
            logprobs = reply.get("logprobs")
            if not isinstance(logprobs, list) or len(logprobs) != len(continuations):
                raise GatewayProtocolError(
                    f"server returned {logprobs!r} for {len(continuations)} continuations"
                )
            for cont, lp in zip(continuations, logprobs):
                if not isinstance(lp, (int, float)):
                    raise GatewayProtocolError(f"missing logprob for continuation {cont!r}")
            self._cache[key] = [float(lp) for lp in logprobs]
            self._persist()
            logprobs = self._cache[key]
        probs = np.exp(np.asarray(logprobs, dtype=float))
        total = probs.sum()
        if total <= 0:
            raise GatewayProtocolError("server logprobs exponentiate to zero mass")
        return probs / total


def remote_predictive_distribution(
    config: RemoteModelConfig, history: History, question: str,
    catalog: QuestionCatalog, transport=None,
) -> np.ndarray:
    return RemotePredictor(config, catalog, transport).predictive(history, question)


def permutation_probe(
    model: PredictiveModel, history: History, question: str,
    n_perms: int = 8, rng_seed=0,
) -> float:
    """Max pairwise total-variation distance of the predictive under random
    reorderings of the history.  Exactly 0 for exchangeable models."""
    history = tuple(history)
    if len(history) < 2:
        return 0.0
    rng = np.random.default_rng(rng_seed)
    seen = {history}
    perms = [history]
    for _ in range(n_perms - 1):
        p = tuple(history[i] for i in rng.permutation(len(history)))
        if p not in seen:
            seen.add(p)
            perms.append(p)
    dists = [np.asarray(model.predictive(p, question), dtype=float) for p in perms]
    worst = 0.0
    for i in range(len(dists)):
        for j in range(i + 1, len(dists)):
            worst = max(worst, 0.5 * float(np.abs(dists[i] - dists[j]).sum()))
    return worst


def make_logprob_app(backend: PredictiveModel):
    """FastAPI shim serving any predictive model over the wire contract."""
    from fastapi import FastAPI, HTTPException

    app = FastAPI(title="logprob shim")

    @app.post("/logprobs")
    def logprobs(req: LogprobRequest):
        try:
            history, qid = parse_prompt(backend.catalog, req.prompt)
        except GatewayProtocolError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        probs = backend.predictive(history, qid)
        expected = [f" {c}" for c in backend.catalog.question(qid).choices]
        out = []
        for cont in req.continuations:
            if cont not in expected:
                raise HTTPException(status_code=400, detail=f"unknown continuation {cont!r}")
            p = float(probs[expected.index(cont)])
            out.append(math.log(p) if p > 0 else -1e30)
        return {"logprobs": out}

    return app


def local_transport(app):
    """In-process transport for tests and the tabular-through-gateway
    substitutability route."""
    from starlette.testclient import TestClient

    client = TestClient(app)

    def transport(endpoint: str, payload: dict, timeout: float) -> dict:
        response = client.post(endpoint, json=payload)
        response.raise_for_status()
        return response.json()

    return transport
