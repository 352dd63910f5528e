"""Question-selection policies: random, feature-similarity baseline,
greedy EIG, and MCTS lookahead.

All ties break toward the lowest catalog index, and every policy is
deterministic given (inputs, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import History, QuestionCatalog
from .infogain import (
    EigEstimate,
    _argmax_question,
    eig_scores,
    simulate_rollout,
)
from .model import DEFAULT_SUPPORT_CAP
from .predictor import PredictiveModel

POLICY_KINDS = ("random", "similarity", "greedy", "mcts")


@dataclass
class MctsConfig:
    top_k: int = 2
    n_rollouts: int = 8
    depth: int = 3
    exact_first_step: bool = True

    def validate(self):
        if self.top_k < 1 or self.n_rollouts < 1 or self.depth < 1:
            raise ValueError("top_k, n_rollouts and depth must all be >= 1")


@dataclass
class PolicyConfig:
    kind: str = "greedy"
    mcts: MctsConfig = field(default_factory=MctsConfig)
    seed: int = 0

    def validate(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        self.mcts.validate()


def select_random(pool, rng) -> str:
    """Uniform draw from the pool (caller removes the pick afterwards)."""
    pool = list(pool)
    if not pool:
        raise ValueError("empty pool")
    rng = np.random.default_rng(rng)
    return pool[int(rng.integers(len(pool)))]


def select_similarity(pool, targets, catalog: QuestionCatalog) -> str:
    """Pick the pool question whose feature vector has the highest mean dot
    product with the target questions' features."""
    pool = list(pool)
    if not pool:
        raise ValueError("empty pool")
    target_feats = []
    for qid in targets:
        f = catalog.question(qid).features
        if f is None:
            raise ValueError(f"target question {qid!r} has no feature vector")
        target_feats.append(f)
    mean_target = np.mean(target_feats, axis=0)
    scores = {}
    for qid in pool:
        f = catalog.question(qid).features
        if f is None:
            raise ValueError(f"pool question {qid!r} has no feature vector")
        scores[qid] = float(f @ mean_target)
    return _argmax_question(catalog, scores)


def select_greedy(
    model: PredictiveModel, history: History, targets, pool,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> tuple[str, EigEstimate]:
    """Maximize exact one-step EIG over the pool."""
    pool = list(pool)
    if not pool:
        raise ValueError("empty pool")
    asked = {h[0] for h in history}
    if asked & set(pool):
        raise ValueError("pool overlaps history")
    scores = eig_scores(model, history, targets, pool, cap)
    winner = _argmax_question(model.catalog, scores)
    return winner, EigEstimate(scores[winner], 0.0, 0)


def select_mcts(
    model: PredictiveModel, history: History, targets, pool,
    config: MctsConfig | None = None, rng_seed=0,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> tuple[str, dict[str, float]]:
    """Shortlist by one-step EIG, then score each shortlisted question by
    the mean realized information gain of seeded greedy rollouts whose
    first step is that question."""
    config = config or MctsConfig()
    config.validate()
    pool = list(pool)
    if not pool:
        raise ValueError("empty pool")
    history = tuple(history)
    depth = min(config.depth, len(pool))

    one_step = eig_scores(model, history, targets, pool, cap)
    shortlist = sorted(
        pool,
        key=lambda q: (-round(one_step[q], 12), model.catalog.index_of(q)),
    )[: config.top_k]

    scores: dict[str, float] = {}
    for qid in shortlist:
        pred = model.predictive(history, qid)
        rewards = []
        for i in range(config.n_rollouts):
            rng = np.random.default_rng([int(rng_seed), model.catalog.index_of(qid), i])
            if config.exact_first_step:
                # enumerate the first answer exactly, roll out below each
                reward = 0.0
                for a, p in enumerate(pred):
                    if p <= 0.0:
                        continue
                    _, ig = simulate_rollout(
                        model, history, targets, pool, depth, rng=rng,
                        cap=cap, first_step=(qid, a),
                    )
                    reward += float(p) * ig
            else:
                a = int(rng.choice(len(pred), p=pred / pred.sum()))
                _, reward = simulate_rollout(
                    model, history, targets, pool, depth, rng=rng,
                    cap=cap, first_step=(qid, a),
                )
            rewards.append(reward)
        scores[qid] = float(np.mean(rewards))
    # rollout values tie whenever the lookahead reaches the same evidence;
    # break those ties by immediate gain, then by catalog index
    winner = min(
        scores,
        key=lambda q: (
            -round(scores[q], 12),
            -round(one_step[q], 12),
            model.catalog.index_of(q),
        ),
    )
    return winner, scores
