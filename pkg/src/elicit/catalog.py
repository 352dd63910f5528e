"""Question catalog and interaction-history types."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# A history is an ordered sequence of (question id, answer index) pairs.
# Questions are asked without replacement within an episode.
HistoryStep = tuple[str, int]
History = tuple[HistoryStep, ...]


class CatalogError(ValueError):
    """Malformed catalog or a reference to a question it does not contain."""


@dataclass
class Question:
    id: str
    text: str
    choices: list[str]
    features: np.ndarray | None = None
    tags: list[str] = field(default_factory=list)

    @property
    def n_choices(self) -> int:
        return len(self.choices)


class QuestionCatalog:
    """Immutable registry of questions, indexed by id and by position.

    Position in the catalog is the universal tie-breaking order used by
    every selection policy.
    """

    def __init__(self, questions: list[Question]):
        ids = [q.id for q in questions]
        if len(set(ids)) != len(ids):
            raise CatalogError("duplicate question ids in catalog")
        feature_dim = None
        for q in questions:
            if q.n_choices < 2:
                raise CatalogError(f"question {q.id!r} has fewer than 2 choices")
            if q.features is not None:
                q.features = np.asarray(q.features, dtype=float)
                if feature_dim is None:
                    feature_dim = q.features.shape[0]
                elif q.features.shape[0] != feature_dim:
                    raise CatalogError(
                        f"question {q.id!r} feature dimension {q.features.shape[0]} "
                        f"differs from {feature_dim}"
                    )
        self._questions = list(questions)
        self._index = {q.id: i for i, q in enumerate(questions)}

    def __len__(self) -> int:
        return len(self._questions)

    def __iter__(self):
        return iter(self._questions)

    def __contains__(self, qid: str) -> bool:
        return qid in self._index

    @property
    def ids(self) -> list[str]:
        return [q.id for q in self._questions]

    def question(self, qid: str) -> Question:
        try:
            return self._questions[self._index[qid]]
        except KeyError:
            raise CatalogError(f"unknown question id {qid!r}") from None

    def index_of(self, qid: str) -> int:
        try:
            return self._index[qid]
        except KeyError:
            raise CatalogError(f"unknown question id {qid!r}") from None

    def alphabet_size(self, qid: str) -> int:
        return self.question(qid).n_choices

    def sort_by_index(self, qids) -> list[str]:
        return sorted(qids, key=self.index_of)


def check_history(catalog: QuestionCatalog, history: History) -> None:
    """Validate a history against a catalog: known questions, in-range
    answers, no repeated question."""
    seen = set()
    for qid, answer in history:
        if qid not in catalog:
            raise CatalogError(f"history references unknown question {qid!r}")
        if qid in seen:
            raise CatalogError(f"question {qid!r} repeated within one history")
        seen.add(qid)
        a = catalog.alphabet_size(qid)
        if not 0 <= answer < a:
            raise CatalogError(
                f"answer index {answer} out of range for question {qid!r} (A={a})"
            )
