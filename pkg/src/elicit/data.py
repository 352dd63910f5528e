"""Dataset schema, entity-level splitting, and synthetic corpus
generation.

The on-disk format is a single JSON document::

    {"questions": [{"id", "text", "choices", "features"?, "tags"?}, ...],
     "entities":  [{"id", "answers": {qid: int}, "meta"?}, ...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import Question, QuestionCatalog
from .serialize import canonical_json


class DatasetFormatError(ValueError):
    pass


@dataclass
class Entity:
    id: str
    answers: dict[str, int]
    meta: dict[str, str] = field(default_factory=dict)


@dataclass
class Dataset:
    catalog: QuestionCatalog
    entities: list[Entity]

    def validate(self) -> None:
        seen = set()
        for e in self.entities:
            if e.id in seen:
                raise DatasetFormatError(f"duplicate entity id {e.id!r}")
            seen.add(e.id)
            for qid, answer in e.answers.items():
                if qid not in self.catalog:
                    raise DatasetFormatError(
                        f"entity {e.id!r} answers unknown question {qid!r}"
                    )
                a = self.catalog.alphabet_size(qid)
                if not isinstance(answer, int) or not 0 <= answer < a:
                    raise DatasetFormatError(
                        f"entity {e.id!r} has out-of-range answer {answer!r} "
                        f"for question {qid!r} (A={a})"
                    )

    def entity(self, entity_id: str) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def records(self, entity_ids=None):
        """(entity, question, answer) triples, e.g. for fitting."""
        keep = None if entity_ids is None else set(entity_ids)
        for e in self.entities:
            if keep is not None and e.id not in keep:
                continue
            for qid, answer in e.answers.items():
                yield e.id, qid, answer

    def to_obj(self) -> dict:
        questions = []
        for q in self.catalog:
            entry = {"id": q.id, "text": q.text, "choices": list(q.choices)}
            if q.features is not None:
                entry["features"] = q.features.tolist()
            if q.tags:
                entry["tags"] = list(q.tags)
            questions.append(entry)
        entities = []
        for e in self.entities:
            entry = {"id": e.id, "answers": dict(sorted(e.answers.items()))}
            if e.meta:
                entry["meta"] = dict(sorted(e.meta.items()))
            entities.append(entry)
        return {"questions": questions, "entities": entities}


def dataset_from_obj(obj) -> Dataset:
    if not isinstance(obj, dict) or "questions" not in obj or "entities" not in obj:
        raise DatasetFormatError("top level must be {'questions': [...], 'entities': [...]}")
    questions = []
    for i, entry in enumerate(obj["questions"]):
        try:
            questions.append(
                Question(
                    id=entry["id"],
                    text=entry["text"],
                    choices=list(entry["choices"]),
                    features=np.asarray(entry["features"], dtype=float)
                    if "features" in entry
                    else None,
                    tags=list(entry.get("tags", [])),
                )
            )
        except (KeyError, TypeError) as exc:
            raise DatasetFormatError(f"questions[{i}]: missing or bad field ({exc})") from exc
    catalog = QuestionCatalog(questions)
    entities = []
    for i, entry in enumerate(obj["entities"]):
        try:
            entities.append(
                Entity(
                    id=entry["id"],
                    answers={q: int(a) for q, a in entry["answers"].items()},
                    meta=dict(entry.get("meta", {})),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"entities[{i}]: missing or bad field ({exc})") from exc
    ds = Dataset(catalog, entities)
    ds.validate()
    return ds


def load_dataset(path) -> Dataset:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"{path}: not valid JSON ({exc})") from exc
    return dataset_from_obj(obj)


def save_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(canonical_json(dataset.to_obj()))


@dataclass
class SplitSpec:
    train: float = 0.70
    val: float = 0.15
    test: float = 0.15
    seed: int = 0

    def validate(self):
        fracs = (self.train, self.val, self.test)
        if any(f < 0 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("split fractions must be >= 0 and sum to 1")


def split_entities(dataset: Dataset, spec: SplitSpec) -> tuple[list[str], list[str], list[str]]:
    """Deterministic entity-level split: shuffle by seed, then take
    floor(f_train * n) / floor(f_val * n) / remainder."""
    spec.validate()
    ids = [e.id for e in dataset.entities]
    if len(ids) < 3:
        raise ValueError("need at least 3 entities to split")
    rng = np.random.default_rng(spec.seed)
    ids = [ids[i] for i in rng.permutation(len(ids))]
    n = len(ids)
    n_train = math.floor(spec.train * n)
    n_val = math.floor(spec.val * n)
    train, val, test = ids[:n_train], ids[n_train : n_train + n_val], ids[n_train + n_val :]
    if not train or not val or not test:
        raise ValueError(f"split produced an empty part: {len(train)}/{len(val)}/{len(test)}")
    return train, val, test


@dataclass
class SyntheticConfig:
    n_entities: int = 200
    n_questions: int = 60
    alphabet_size: int = 4
    n_latent_clusters: int = 6
    noise: float = 0.2
    seed: int = 0
    feature_dim: int = 16

    def validate(self):
        if min(self.n_entities, self.n_questions, self.n_latent_clusters) < 1:
            raise ValueError("counts must be >= 1")
        if self.alphabet_size < 2:
            raise ValueError("alphabet_size must be >= 2")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must be in [0, 1]")


def generate_synthetic(config: SyntheticConfig) -> Dataset:
    """Cluster-structured corpus: each cluster fixes a prototype answer per
    question; each entity copies its cluster's prototypes and, with
    probability ``noise``, replaces an answer with a uniform draw over the
    full alphabet."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    a = config.alphabet_size
    prototypes = rng.integers(0, a, size=(config.n_latent_clusters, config.n_questions))
    assignment = rng.integers(0, config.n_latent_clusters, size=config.n_entities)

    answers = prototypes[assignment].copy()
    flip = rng.random(answers.shape) < config.noise
    answers[flip] = rng.integers(0, a, size=int(flip.sum()))

    width = len(str(config.n_questions - 1))
    questions = []
    for j in range(config.n_questions):
        feats = rng.normal(size=config.feature_dim)
        feats /= np.linalg.norm(feats)
        counts = np.bincount(answers[:, j], minlength=a)
        agreement = counts.max() / config.n_entities
        questions.append(
            Question(
                id=f"q{j:0{width}d}",
                text=f"Synthetic question {j}",
                choices=[f"choice{k}" for k in range(a)],
                features=np.round(feats, 10),
                tags=[f"agreement:{agreement:.4f}"],
            )
        )
    catalog = QuestionCatalog(questions)

    ewidth = len(str(config.n_entities - 1))
    entities = [
        Entity(
            id=f"e{i:0{ewidth}d}",
            answers={questions[j].id: int(answers[i, j]) for j in range(config.n_questions)},
            meta={"cluster": str(int(assignment[i]))},
        )
        for i in range(config.n_entities)
    ]
    ds = Dataset(catalog, entities)
    ds.validate()
    return ds
