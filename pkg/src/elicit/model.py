"""Exact finite-latent Bayesian predictive model.

The latent space is a finite set of entity types with a prior and
per-question answer likelihoods.  Posterior updates, one-step predictives,
joint distributions over held-out target questions, and sequence
log-likelihoods are all closed form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import History, QuestionCatalog

LOG_FLOOR = 1e-12  # applied inside log arguments only, never to stored probs
DEFAULT_SUPPORT_CAP = 10**6


class ImpossibleEvidenceError(ValueError):
    """An observation with zero probability under the model."""


class SupportCapExceededError(ValueError):
    """Joint enumeration would exceed the configured support cap; use a
    sampled estimate instead."""


class UnknownQuestionError(KeyError):
    pass


@dataclass
class LatentTable:
    """Finite latent space: prior over latent values and, per question,
    an M x A matrix of answer probabilities given the latent value."""

    latent_ids: list[str]
    prior: np.ndarray
    likelihood: dict[str, np.ndarray]

    def __post_init__(self):
        self.prior = np.asarray(self.prior, dtype=float)
        self.likelihood = {q: np.asarray(m, dtype=float) for q, m in self.likelihood.items()}
        m = len(self.latent_ids)
        if self.prior.shape != (m,):
            raise ValueError("prior length does not match latent_ids")
        if np.any(self.prior < 0) or abs(self.prior.sum() - 1.0) > 1e-12:
            raise ValueError("prior must be nonnegative and sum to 1")
        for q, mat in self.likelihood.items():
            if mat.ndim != 2 or mat.shape[0] != m:
                raise ValueError(f"likelihood for {q!r} must be M x A")
            if np.any(mat < 0) or np.any(mat > 1):
                raise ValueError(f"likelihood entries for {q!r} outside [0,1]")
            if np.max(np.abs(mat.sum(axis=1) - 1.0)) > 1e-12:
                raise ValueError(f"likelihood rows for {q!r} do not sum to 1")

    @property
    def n_latent(self) -> int:
        return len(self.latent_ids)

    def rows(self, qid: str) -> np.ndarray:
        try:
            return self.likelihood[qid]
        except KeyError:
            raise UnknownQuestionError(qid) from None

    def alphabet_size(self, qid: str) -> int:
        return self.rows(qid).shape[1]


@dataclass
class Belief:
    """Posterior weights over the latent values of a table.  Immutable
    snapshot; updates return new values."""

    weights: np.ndarray
    table: LatentTable

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)

    @classmethod
    def from_prior(cls, table: LatentTable) -> "Belief":
        return cls(table.prior.copy(), table)


@dataclass
class Distribution:
    """Probabilities over a finite support (answer indices or tuples)."""

    probs: np.ndarray
    support: list = field(default_factory=list)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)


def fit_tabular(catalog: QuestionCatalog, records, smoothing: float = 1.0) -> LatentTable:
    """Fit the smoothed empirical-frequency table from observation records.

    ``records`` is an iterable of (entity_id, question_id, answer_index)
    triples; repeated observations accumulate counts.  Each distinct entity
    becomes one latent value with uniform prior.  Questions an entity never
    answered get a uniform likelihood row.
    """
    if smoothing < 0 or not math.isfinite(smoothing):
        raise ValueError("smoothing must be finite and >= 0")
    entity_order: list[str] = []
    counts: dict[str, dict[str, np.ndarray]] = {}
    for entity, qid, answer in records:
        if qid not in catalog:
            raise UnknownQuestionError(qid)
        a = catalog.alphabet_size(qid)
        if not 0 <= answer < a:
            raise ValueError(
                f"answer index {answer} out of range for question {qid!r} "
                f"answered by entity {entity!r}"
            )
        if entity not in counts:
            counts[entity] = {}
            entity_order.append(entity)
        per_q = counts[entity]
        if qid not in per_q:
            per_q[qid] = np.zeros(a)
        per_q[qid][answer] += 1
    if not entity_order:
        raise ValueError("empty training set")

    m = len(entity_order)
    likelihood = {}
    for q in catalog:
        a = q.n_choices
        mat = np.full((m, a), 1.0 / a)
        for i, entity in enumerate(entity_order):
            c = counts[entity].get(q.id)
            if c is not None:
                total = c.sum() + a * smoothing
                if total > 0:
                    mat[i] = (c + smoothing) / total
        likelihood[q.id] = mat
    return LatentTable(entity_order, np.full(m, 1.0 / m), likelihood)


def posterior_update(belief: Belief, question: str, answer: int) -> Belief:
    """Condition a belief on one observed (question, answer) pair."""
    rows = belief.table.rows(question)
    if not 0 <= answer < rows.shape[1]:
        raise ValueError(f"answer index {answer} out of range for {question!r}")
    w = belief.weights * rows[:, answer]
    total = w.sum()
    if total <= 0:
        raise ImpossibleEvidenceError(
            f"observation ({question!r}, {answer}) has zero probability under the model"
        )
    return Belief(w / total, belief.table)


def belief_from_history(table: LatentTable, history: History) -> Belief:
    b = Belief.from_prior(table)
    for qid, answer in history:
        b = posterior_update(b, qid, answer)
    return b


def predictive_distribution(belief: Belief, question: str) -> Distribution:
    """One-step predictive over answers to ``question``."""
    rows = belief.table.rows(question)
    probs = belief.weights @ rows
    return Distribution(probs, list(range(rows.shape[1])))


def target_product_matrix(table: LatentTable, targets) -> np.ndarray:
    """M x S matrix of per-latent joint answer probabilities over the
    target questions, S = product of alphabet sizes, row-major in target
    order.  Shared by every joint computation with the same targets."""
    mat = np.ones((table.n_latent, 1))
    for qid in targets:
        rows = table.rows(qid)
        mat = (mat[:, :, None] * rows[:, None, :]).reshape(table.n_latent, -1)
    return mat


def joint_target_distribution(
    belief: Belief, targets, cap: int = DEFAULT_SUPPORT_CAP
) -> Distribution:
    """Exact joint distribution over answer tuples for the target questions,
    enumerated row-major in target order."""
    targets = list(targets)
    if not targets:
        raise ValueError("target set must be non-empty")
    sizes = [belief.table.alphabet_size(q) for q in targets]
    total = math.prod(sizes)
    if total > cap:
        raise SupportCapExceededError(
            f"joint support size {total} exceeds cap {cap}; use a sampled estimate"
        )
    probs = belief.weights @ target_product_matrix(belief.table, targets)
    support = list(itertools.product(*[range(a) for a in sizes]))
    return Distribution(probs, support)


def entropy(dist) -> float:
    """Shannon entropy in nats, with 0 log 0 := 0."""
    p = dist.probs if isinstance(dist, Distribution) else np.asarray(dist, dtype=float)
    return float(-np.sum(p * np.log(np.maximum(p, LOG_FLOOR))))


def sequence_log_likelihood(table: LatentTable, history: History) -> float:
    """Log probability of the observed answer sequence under the model's
    chain rule.  Impossible evidence yields -inf rather than an exception."""
    total = 0.0
    belief = Belief.from_prior(table)
    for qid, answer in history:
        p = float(predictive_distribution(belief, qid).probs[answer])
        if p <= 0.0:
            return float("-inf")
        total += math.log(p)
        belief = posterior_update(belief, qid, answer)
    return total
