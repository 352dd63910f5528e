"""Evaluation protocol: seeded trials over held-out entities, per-step
accuracy / perplexity / ECE / Brier, reliability bins, and subgroup
filtering by population answer frequency."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .model import LOG_FLOOR, ImpossibleEvidenceError
from .policy import PolicyConfig, select_greedy, select_mcts, select_random, select_similarity
from .predictor import PredictiveModel, TabularPredictor
from .serialize import canonical_json, fmt_float

N_BINS = 10
SUBGROUP_THRESHOLDS = {"all": None, "medium": 0.5, "hard": 0.3}


@dataclass
class TrialConfig:
    n_candidates: int = 20
    n_targets: int = 5
    rounds: int = 8
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    subgroup: str = "all"
    seed: int = 0
    oracle: str = "replay"  # "replay": answers from recorded data; "model": sampled from the surrogate

    def validate(self):
        if self.n_candidates < 1 or self.n_targets < 1 or self.rounds < 0:
            raise ValueError("n_candidates, n_targets >= 1 and rounds >= 0 required")
        if self.subgroup not in SUBGROUP_THRESHOLDS:
            raise ValueError(f"unknown subgroup {self.subgroup!r}")
        if self.oracle not in ("replay", "model"):
            raise ValueError(f"unknown oracle {self.oracle!r}")
        self.policy.validate()


@dataclass
class PredictionRecord:
    trial: int
    step: int
    target: str
    probs: np.ndarray
    true_answer: int
    confidence: float
    correct: bool


@dataclass
class TrialRecord:
    trial: int
    entity_id: str
    candidates: list[str]
    targets: list[str]
    decisions: list[tuple[int, str, int]]
    predictions: list[PredictionRecord]
    flags: list[str] = field(default_factory=list)


def run_trial(
    dataset: Dataset, model: PredictiveModel, config: TrialConfig,
    entity_id: str, trial_index: int = 0,
) -> TrialRecord:
    """One evaluation episode: sample disjoint candidate/target pools from
    the entity's answered questions, then alternate predict / select /
    reveal / update for the configured number of rounds."""
    config.validate()
    rng = np.random.default_rng([config.seed, trial_index])

    if config.oracle == "model":
        answered = list(model.catalog.ids)
    else:
        entity = dataset.entity(entity_id)
        answered = [qid for qid in model.catalog.ids if qid in entity.answers]
    need = config.n_candidates + config.n_targets
    if len(answered) < need:
        raise ValueError(
            f"entity {entity_id!r} answered {len(answered)} questions; {need} needed"
        )
    picked = rng.choice(len(answered), size=need, replace=False)
    candidates = [answered[i] for i in picked[: config.n_candidates]]
    targets = [answered[i] for i in picked[config.n_candidates :]]

    if config.oracle == "model":
        if not isinstance(model, TabularPredictor):
            raise ValueError("the generative oracle requires a tabular model")
        latent = int(rng.choice(model.table.n_latent, p=model.table.prior))
        drawn: dict[str, int] = {}

        def reveal(qid: str) -> int:
            if qid not in drawn:
                row = model.table.rows(qid)[latent]
                drawn[qid] = int(rng.choice(len(row), p=row / row.sum()))
            return drawn[qid]
    else:
        def reveal(qid: str) -> int:
            return entity.answers[qid]

    record = TrialRecord(trial_index, entity_id, candidates, targets, [], [])
    history: tuple = ()
    remaining = list(candidates)
    for t in range(config.rounds + 1):
        for qid in targets:
            # rounded so equivalent model backends yield identical records
            probs = np.round(np.asarray(model.predictive(history, qid), dtype=float), 12)
            true = reveal(qid)
            pred = int(np.argmax(probs))
            record.predictions.append(
                PredictionRecord(
                    trial_index, t, qid, probs, true,
                    float(probs.max()), pred == true,
                )
            )
        if t == config.rounds or not remaining:
            break
        kind = config.policy.kind
        if kind == "random":
            qid = select_random(remaining, rng)
        elif kind == "similarity":
            qid = select_similarity(remaining, targets, model.catalog)
        elif kind == "greedy":
            qid, _ = select_greedy(model, history, targets, remaining)
        else:
            mcts_seed = int(rng.integers(2**31))
            qid, _ = select_mcts(
                model, history, targets, remaining, config.policy.mcts, mcts_seed
            )
        answer = reveal(qid)
        record.decisions.append((t, qid, answer))
        remaining.remove(qid)
        try:
            history = history + ((qid, answer),)
            model.predictive(history, targets[0])  # force belief update now
        except ImpossibleEvidenceError:
            record.flags.append(f"impossible evidence at step {t} on {qid!r}")
            break
    return record


@dataclass
class SubgroupFilter:
    """Eligibility of (target question, true answer) pairs by population
    answer frequency over the training split (strict <)."""

    threshold: float | None
    frequencies: dict[str, np.ndarray]
    missing: set[str]

    def eligible(self, qid: str, answer: int) -> bool:
        if self.threshold is None:
            return True
        if qid in self.missing:
            return False
        return float(self.frequencies[qid][answer]) < self.threshold


def subgroup_filter(dataset: Dataset, threshold: float | None, train_ids) -> SubgroupFilter:
    train = set(train_ids)
    frequencies = {}
    missing = set()
    for q in dataset.catalog:
        counts = np.zeros(q.n_choices)
        for e in dataset.entities:
            if e.id in train and q.id in e.answers:
                counts[e.answers[q.id]] += 1
        if counts.sum() == 0:
            missing.add(q.id)
        else:
            frequencies[q.id] = counts / counts.sum()
    return SubgroupFilter(threshold, frequencies, missing)


def _bin_index(confidence: float) -> int:
    return min(N_BINS - 1, max(0, math.ceil(confidence * N_BINS) - 1))


def compute_metrics(records: list[PredictionRecord]) -> dict:
    """Accuracy, perplexity, ECE (10 equal-width bins on (0,1], empty bins
    skipped), multiclass Brier, and the reliability bins themselves."""
    if not records:
        raise ValueError("no records")
    n = len(records)
    accuracy = sum(r.correct for r in records) / n
    nll = [-math.log(max(float(r.probs[r.true_answer]), LOG_FLOOR)) for r in records]
    perplexity = math.exp(sum(nll) / n)
    brier = 0.0
    for r in records:
        one_hot = np.zeros_like(r.probs)
        one_hot[r.true_answer] = 1.0
        brier += float(np.sum((r.probs - one_hot) ** 2))
    brier /= n

    bins = [{"confidence_sum": 0.0, "correct": 0, "count": 0} for _ in range(N_BINS)]
    for r in records:
        b = bins[_bin_index(r.confidence)]
        b["confidence_sum"] += r.confidence
        b["correct"] += int(r.correct)
        b["count"] += 1
    ece = 0.0
    reliability = []
    for i, b in enumerate(bins):
        if b["count"] == 0:
            continue
        mean_conf = b["confidence_sum"] / b["count"]
        bin_acc = b["correct"] / b["count"]
        ece += (b["count"] / n) * abs(bin_acc - mean_conf)
        reliability.append(
            {"bin": i, "mean_confidence": mean_conf, "accuracy": bin_acc, "count": b["count"]}
        )
    return {
        "n": n,
        "accuracy": accuracy,
        "perplexity": perplexity,
        "ece": ece,
        "brier": brier,
        "reliability": reliability,
    }


@dataclass
class MetricsReport:
    per_step: dict[int, dict]

    def steps(self) -> list[int]:
        return sorted(self.per_step)

    def series(self, metric: str) -> list[float]:
        return [self.per_step[t][metric] for t in self.steps()]

    def to_obj(self) -> dict:
        return {"per_step": {str(t): self.per_step[t] for t in self.steps()}}


def aggregate_metrics(records: list[PredictionRecord], predicate=None) -> MetricsReport:
    by_step: dict[int, list[PredictionRecord]] = {}
    for r in records:
        if predicate is not None and not predicate(r.target, r.true_answer):
            continue
        by_step.setdefault(r.step, []).append(r)
    return MetricsReport({t: compute_metrics(rs) for t, rs in sorted(by_step.items())})


@dataclass
class ExperimentResult:
    config_obj: dict
    trials: list[TrialRecord]
    records: list[PredictionRecord]
    report: MetricsReport
    n_failed: int


def run_experiment(
    dataset: Dataset, model: PredictiveModel, config: TrialConfig,
    n_trials: int, entity_ids=None, train_ids=None,
) -> ExperimentResult:
    """Seeded trials over uniformly drawn entities with per-step metric
    aggregation.  ``entity_ids`` defaults to every dataset entity;
    ``train_ids`` feeds the subgroup frequency table."""
    config.validate()
    pool = list(entity_ids) if entity_ids is not None else [e.id for e in dataset.entities]
    if not pool and config.oracle == "replay":
        raise ValueError("no entities to evaluate")
    ent_rng = np.random.default_rng([config.seed, 987654321])
    trials: list[TrialRecord] = []
    records: list[PredictionRecord] = []
    n_failed = 0
    for i in range(n_trials):
        entity_id = pool[int(ent_rng.integers(len(pool)))] if pool else "-"
        trial = run_trial(dataset, model, config, entity_id, trial_index=i)
        if trial.flags:
            n_failed += 1
        trials.append(trial)
        records.extend(trial.predictions)

    predicate = None
    threshold = SUBGROUP_THRESHOLDS[config.subgroup]
    if threshold is not None:
        sub = subgroup_filter(dataset, threshold, train_ids or pool)
        predicate = sub.eligible
    report = aggregate_metrics(records, predicate)
    config_obj = {
        "n_candidates": config.n_candidates,
        "n_targets": config.n_targets,
        "rounds": config.rounds,
        "policy": config.policy.kind,
        "subgroup": config.subgroup,
        "seed": config.seed,
        "oracle": config.oracle,
        "n_trials": n_trials,
        "n_failed": n_failed,
    }
    return ExperimentResult(config_obj, trials, records, report, n_failed)


def write_report_json(result: ExperimentResult, path) -> None:
    obj = {"config": result.config_obj, "metrics": result.report.to_obj()}
    with open(path, "w") as fh:
        fh.write(canonical_json(obj, indent=2))


def write_records_csv(records: list[PredictionRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["trial", "step", "target", "true_answer", "predicted", "confidence", "correct", "probs"]
        )
        for r in records:
            writer.writerow(
                [
                    r.trial, r.step, r.target, r.true_answer, int(np.argmax(r.probs)),
                    fmt_float(r.confidence), int(r.correct),
                    "|".join(fmt_float(p) for p in r.probs),
                ]
            )


def write_reliability_csv(report: MetricsReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "bin", "mean_confidence", "accuracy", "count"])
        for t in report.steps():
            for b in report.per_step[t]["reliability"]:
                writer.writerow(
                    [t, b["bin"], fmt_float(b["mean_confidence"]), fmt_float(b["accuracy"]), b["count"]]
                )
