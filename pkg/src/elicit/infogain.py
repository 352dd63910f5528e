"""Information gain and expected information gain over held-out targets.

Single-step EIG is an exact expectation over the simulated next answer.
Multi-step EIG either enumerates answer trajectories exactly (small
supports) or averages over autoregressively sampled trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import History
from .model import DEFAULT_SUPPORT_CAP, SupportCapExceededError
from .predictor import PredictiveModel, TabularPredictor

DEFAULT_MC_SAMPLES = 128


@dataclass
class EigEstimate:
    value: float
    std_error: float = 0.0  # 0 iff computed by exact enumeration
    n_samples: int = 0


def information_gain(
    model: PredictiveModel, history: History, targets, step: tuple[str, int],
    cap: int = DEFAULT_SUPPORT_CAP,
) -> float:
    """Realized entropy drop about the targets from one observed step.
    Signed: a specific answer may increase entropy."""
    qid, _ = step
    if any(qid == h[0] for h in history):
        raise ValueError(f"question {qid!r} already in history")
    before = model.joint_entropy(history, targets, cap)
    after = model.joint_entropy(tuple(history) + (step,), targets, cap)
    return before - after


def expected_information_gain(
    model: PredictiveModel, history: History, targets, candidate: str,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> EigEstimate:
    """Exact one-step EIG: expectation of the entropy drop over the model's
    own predictive for the candidate's answer."""
    if any(candidate == h[0] for h in history):
        raise ValueError(f"candidate {candidate!r} already in history")
    history = tuple(history)
    base = model.joint_entropy(history, targets, cap)
    pred = model.predictive(history, candidate)
    expected_after = 0.0
    for a, p in enumerate(pred):
        if p <= 0.0:
            continue
        expected_after += float(p) * model.joint_entropy(
            history + ((candidate, a),), targets, cap
        )
    return EigEstimate(base - expected_after, 0.0, 0)


def eig_scores(
    model: PredictiveModel, history: History, targets, pool,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> dict[str, float]:
    """One-step EIG for every pool question.  Uses the tabular fast path
    when available."""
    if isinstance(model, TabularPredictor) and math.prod(
        model.catalog.alphabet_size(q) for q in targets
    ) <= cap:
        return model.eig_profile(tuple(history), targets, pool, cap)
    return {
        qid: expected_information_gain(model, history, targets, qid, cap).value
        for qid in pool
    }


def expected_information_gain_set(
    model: PredictiveModel, history: History, targets, candidates,
    n_samples: int = 0, rng=None, cap: int = DEFAULT_SUPPORT_CAP,
) -> EigEstimate:
    """Multi-step EIG for asking all ``candidates`` in order.

    ``n_samples == 0`` requests exact enumeration of answer trajectories
    (subject to the support cap); otherwise answers are sampled
    autoregressively from the model.
    """
    candidates = list(candidates)
    if len(set(candidates)) != len(candidates):
        raise ValueError("candidates must be pairwise distinct")
    asked = {h[0] for h in history}
    if any(c in asked for c in candidates):
        raise ValueError("candidate already in history")
    history = tuple(history)
    base = model.joint_entropy(history, targets, cap)
    if not candidates:
        return EigEstimate(0.0, 0.0, 0)

    if n_samples == 0:
        traj_size = math.prod(model.catalog.alphabet_size(c) for c in candidates)
        if traj_size > cap:
            raise SupportCapExceededError(
                f"{traj_size} answer trajectories exceed cap {cap}; "
                "request a sampled estimate"
            )
        expected_after = _enumerate_after(model, history, targets, candidates, 1.0, cap)
        return EigEstimate(base - expected_after, 0.0, 0)

    if n_samples < 1:
        raise ValueError("n_samples must be >= 1, or 0 for exact enumeration")
    rng = np.random.default_rng(rng)
    leaves = np.empty(n_samples)
    for i in range(n_samples):
        h = history
        for c in candidates:
            probs = model.predictive(h, c)
            a = int(rng.choice(len(probs), p=probs / probs.sum()))
            h = h + ((c, a),)
        leaves[i] = model.joint_entropy(h, targets, cap)
    se = float(np.std(leaves, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return EigEstimate(base - float(np.mean(leaves)), se, n_samples)


def _enumerate_after(model, history, targets, remaining, prefix_p, cap) -> float:
    if not remaining:
        return prefix_p * model.joint_entropy(history, targets, cap)
    if prefix_p == 0.0:
        return 0.0
    c = remaining[0]
    probs = model.predictive(history, c)
    total = 0.0
    for a, p in enumerate(probs):
        if p <= 0.0:
            continue
        total += _enumerate_after(
            model, history + ((c, a),), targets, remaining[1:], prefix_p * float(p), cap
        )
    return total


def simulate_rollout(
    model: PredictiveModel, history: History, targets, pool, depth: int,
    rng=None, cap: int = DEFAULT_SUPPORT_CAP, first_step: tuple[str, int] | None = None,
) -> tuple[History, float]:
    """Simulate a greedy question/answer trajectory of the given depth.

    Questions are chosen by the one-step-EIG greedy rule over the remaining
    pool; answers are sampled from the model's predictive.  Returns the
    simulated extension and the realized information gain of the whole
    extension.  ``first_step`` optionally pins the first (question, answer).
    """
    pool = list(pool)
    if not pool:
        raise ValueError("empty pool")
    if depth < 1 or depth > len(pool):
        raise ValueError("depth must be in [1, |pool|]")
    rng = np.random.default_rng(rng)
    history = tuple(history)
    extension: list[tuple[str, int]] = []
    h = history
    remaining = list(pool)
    for step_idx in range(depth):
        if step_idx == 0 and first_step is not None:
            qid, answer = first_step
        else:
            scores = eig_scores(model, h, targets, remaining, cap)
            qid = _argmax_question(model.catalog, scores)
            probs = model.predictive(h, qid)
            answer = int(rng.choice(len(probs), p=probs / probs.sum()))
        extension.append((qid, answer))
        remaining.remove(qid)
        h = h + ((qid, answer),)
    before = model.joint_entropy(history, targets, cap)
    after = model.joint_entropy(h, targets, cap)
    return tuple(extension), before - after


SCORE_DECIMALS = 12  # scores are compared after rounding so float noise
                     # never breaks structural ties


def _argmax_question(catalog, scores: dict[str, float]) -> str:
    best = None
    best_score = None
    for qid in sorted(scores, key=catalog.index_of):
        s = round(scores[qid], SCORE_DECIMALS)
        if best_score is None or s > best_score:
            best, best_score = qid, s
    return best
