"""Predictive-model interface shared by the exact tabular surrogate and
remote logprob-backed models.

Everything downstream (information gain, policies, the evaluation harness,
the session service) talks to a :class:`PredictiveModel`; any model that can
produce one-step answer distributions can drive the whole engine.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .catalog import History, QuestionCatalog
from .model import (
    DEFAULT_SUPPORT_CAP,
    LOG_FLOOR,
    Belief,
    Distribution,
    LatentTable,
    SupportCapExceededError,
    belief_from_history,
    entropy,
    posterior_update,
    target_product_matrix,
)


class PredictiveModel:
    """Base contract: a catalog plus one-step predictives given a history.

    The default joint over target questions is the autoregressive chain
    rule; subclasses with exact internals may override it.
    """

    def __init__(self, catalog: QuestionCatalog):
        self.catalog = catalog

    def predictive(self, history: History, question: str) -> np.ndarray:
        raise NotImplementedError

    def joint_target(
        self, history: History, targets, cap: int = DEFAULT_SUPPORT_CAP
    ) -> Distribution:
        targets = list(targets)
        if not targets:
            raise ValueError("target set must be non-empty")
        sizes = [self.catalog.alphabet_size(q) for q in targets]
        if math.prod(sizes) > cap:
            raise SupportCapExceededError(
                f"joint support size {math.prod(sizes)} exceeds cap {cap}"
            )
        support = list(itertools.product(*[range(a) for a in sizes]))
        probs = np.empty(len(support))
        self._chain_joint(history, targets, 1.0, probs, 0, [])
        return Distribution(probs, support)

    def _chain_joint(self, history, targets, prefix_p, out, offset, assigned):
        k = len(assigned)
        if k == len(targets):
            out[offset] = prefix_p
            return offset + 1
        if prefix_p == 0.0:
            # entire subtree has zero mass; fill without further model calls
            width = math.prod(self.catalog.alphabet_size(q) for q in targets[k:])
            out[offset : offset + width] = 0.0
            return offset + width
        probs = self.predictive(history, targets[k])
        for a, p in enumerate(probs):
            assigned.append((targets[k], a))
            offset = self._chain_joint(
                tuple(history) + ((targets[k], a),),
                targets,
                prefix_p * float(p),
                out,
                offset,
                assigned,
            )
            assigned.pop()
        return offset

    def joint_entropy(self, history: History, targets, cap: int = DEFAULT_SUPPORT_CAP) -> float:
        return entropy(self.joint_target(history, targets, cap))


class TabularPredictor(PredictiveModel):
    """Exact surrogate: predictives and joints computed in closed form from
    a :class:`LatentTable`, with per-history belief caching."""

    def __init__(self, table: LatentTable, catalog: QuestionCatalog):
        super().__init__(catalog)
        self.table = table
        self._beliefs: dict[History, Belief] = {}
        self._product_mats: dict[tuple, np.ndarray] = {}

    def belief(self, history: History) -> Belief:
        history = tuple(history)
        cached = self._beliefs.get(history)
        if cached is not None:
            return cached
        if not history:
            b = Belief.from_prior(self.table)
        else:
            qid, answer = history[-1]
            b = posterior_update(self.belief(history[:-1]), qid, answer)
        if len(self._beliefs) > 100_000:
            self._beliefs.clear()
        self._beliefs[history] = b
        return b

    def predictive(self, history: History, question: str) -> np.ndarray:
        return self.belief(history).weights @ self.table.rows(question)

    def product_matrix(self, targets) -> np.ndarray:
        key = tuple(targets)
        mat = self._product_mats.get(key)
        if mat is None:
            mat = target_product_matrix(self.table, key)
            if len(self._product_mats) > 64:
                self._product_mats.clear()
            self._product_mats[key] = mat
        return mat

    def joint_target(
        self, history: History, targets, cap: int = DEFAULT_SUPPORT_CAP
    ) -> Distribution:
        targets = list(targets)
        if not targets:
            raise ValueError("target set must be non-empty")
        sizes = [self.table.alphabet_size(q) for q in targets]
        if math.prod(sizes) > cap:
            raise SupportCapExceededError(
                f"joint support size {math.prod(sizes)} exceeds cap {cap}"
            )
        probs = self.belief(history).weights @ self.product_matrix(targets)
        support = list(itertools.product(*[range(a) for a in sizes]))
        return Distribution(probs, support)

    def eig_profile(
        self, history: History, targets, pool, cap: int = DEFAULT_SUPPORT_CAP
    ) -> dict[str, float]:
        """Exact one-step expected information gain for every pool question,
        vectorized over answers."""
        targets = list(targets)
        w = self.belief(history).weights
        tm = self.product_matrix(targets)
        base = entropy(w @ tm)
        out = {}
        for qid in pool:
            rows = self.table.rows(qid)
            pred = w @ rows
            posts = rows.T * w  # (A, M), unnormalized posteriors
            joints = posts @ tm  # row a sums to pred[a]
            expected_h = 0.0
            for a, p in enumerate(pred):
                if p <= 0.0:
                    continue
                cond = joints[a] / p
                expected_h += p * -np.sum(cond * np.log(np.maximum(cond, LOG_FLOOR)))
            out[qid] = base - float(expected_h)
        return out


def as_predictor(model, catalog: QuestionCatalog | None = None) -> PredictiveModel:
    """Coerce a LatentTable (plus catalog) or pass through a model."""
    if isinstance(model, PredictiveModel):
        return model
    if isinstance(model, LatentTable):
        if catalog is None:
            raise ValueError("a catalog is required to wrap a LatentTable")
        return TabularPredictor(model, catalog)
    raise TypeError(f"cannot interpret {type(model).__name__} as a predictive model")
