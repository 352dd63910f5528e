"""Executable checks of the planning guarantees: brute-force optimal
question sets, the greedy (1 - 1/e) bound, the simulator transfer bound,
and a submodularity probe that gates the greedy bound."""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import History, QuestionCatalog
from .infogain import _argmax_question, expected_information_gain_set
from .model import (
    DEFAULT_SUPPORT_CAP,
    Belief,
    ImpossibleEvidenceError,
    LatentTable,
    belief_from_history,
    joint_target_distribution,
)
from .predictor import as_predictor

SLACK_TOL = 1e-9
COMBINATION_CAP = 10_000


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    slack: float
    holds: bool
    instance_digest: str
    flags: list[str] = field(default_factory=list)


@dataclass
class ProbeResult:
    violation_rate: float
    n_checks: int
    flags: list[str] = field(default_factory=list)


def _digest(*parts) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return np.round(o, 12).tolist()
        if isinstance(o, LatentTable):
            return {
                "latent_ids": o.latent_ids,
                "prior": default(o.prior),
                "likelihood": {q: default(m) for q, m in sorted(o.likelihood.items())},
            }
        raise TypeError(type(o))

    blob = json.dumps(parts, default=default, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def brute_force_optimal_set(
    model, history: History, targets, pool, budget: int,
    catalog: QuestionCatalog | None = None, cap: int = DEFAULT_SUPPORT_CAP,
) -> tuple[tuple[str, ...], float]:
    """Exhaustive argmax of exact multi-step EIG over all budget-sized
    subsets of the pool.  Ties go to the lexicographically smallest tuple
    of catalog indices."""
    model = as_predictor(model, catalog)
    pool = model.catalog.sort_by_index(pool)
    if not 1 <= budget <= len(pool):
        raise ValueError("budget must be in [1, |pool|]")
    if math.comb(len(pool), budget) > COMBINATION_CAP:
        raise ValueError(
            f"C({len(pool)}, {budget}) exceeds the combinatorial cap {COMBINATION_CAP}"
        )
    best: tuple[str, ...] | None = None
    best_value = None
    for subset in itertools.combinations(pool, budget):
        value = round(
            expected_information_gain_set(model, history, targets, subset, 0, cap=cap).value,
            12,
        )
        if best_value is None or value > best_value:
            best, best_value = subset, value
    return best, best_value


def greedy_set(
    model, history: History, targets, pool, budget: int,
    catalog: QuestionCatalog | None = None, cap: int = DEFAULT_SUPPORT_CAP,
) -> tuple[tuple[str, ...], float]:
    """Build a question set by repeatedly adding the candidate with the
    largest exact marginal set-EIG."""
    model = as_predictor(model, catalog)
    remaining = model.catalog.sort_by_index(pool)
    chosen: list[str] = []
    value = 0.0
    for _ in range(budget):
        scores = {
            c: expected_information_gain_set(
                model, history, targets, chosen + [c], 0, cap=cap
            ).value
            for c in remaining
        }
        pick = _argmax_question(model.catalog, scores)
        chosen.append(pick)
        remaining.remove(pick)
        value = scores[pick]
    return tuple(chosen), value


def submodularity_probe(
    model, targets, pool, n_checks: int, rng_seed=0,
    catalog: QuestionCatalog | None = None, cap: int = DEFAULT_SUPPORT_CAP,
    history: History = (),
) -> ProbeResult:
    """Empirically test diminishing marginal set EIG: for sampled question
    sets S subset T and an extra question x, the exact marginal gain
    f(S + x) - f(S) must be at least f(T + x) - f(T), where f is the exact
    multi-step EIG of asking the whole set."""
    model = as_predictor(model, catalog)
    if n_checks == 0:
        return ProbeResult(0.0, 0, ["no checks"])
    pool = model.catalog.sort_by_index(pool)
    if len(pool) < 2:
        raise ValueError("pool must contain at least 2 questions")

    def f(subset):
        return expected_information_gain_set(
            model, history, targets, subset, 0, cap=cap
        ).value

    rng = np.random.default_rng(rng_seed)
    violations = 0
    for _ in range(n_checks):
        order = list(rng.permutation(pool))
        t_size = int(rng.integers(1, len(pool)))
        s_size = int(rng.integers(0, t_size + 1))
        big, small = order[:t_size], order[:s_size]
        x = order[t_size]
        gain_small = f(small + [x]) - f(small)
        gain_big = f(big + [x]) - f(big)
        if gain_small < gain_big - SLACK_TOL:
            violations += 1
    return ProbeResult(violations / n_checks, n_checks, [])


def check_greedy_bound(
    model, history: History, targets, pool, budget: int,
    n_probe_checks: int = 100, rng_seed=0,
    catalog: QuestionCatalog | None = None, cap: int = DEFAULT_SUPPORT_CAP,
) -> BoundReport:
    """Compare greedy set EIG against (1 - 1/e) times the brute-force
    optimum.  The bound is only assertable when the submodularity probe
    reports no violations; otherwise the report is flagged."""
    model = as_predictor(model, catalog)
    probe = submodularity_probe(
        model, targets, pool, n_probe_checks, rng_seed, cap=cap, history=history
    )
    _, greedy_value = greedy_set(model, history, targets, pool, budget, cap=cap)
    _, optimal_value = brute_force_optimal_set(
        model, history, targets, pool, budget, cap=cap
    )
    lhs = greedy_value
    rhs = (1.0 - 1.0 / math.e) * optimal_value
    slack = lhs - rhs
    flags = []
    if probe.violation_rate > 0:
        flags.append("assumption-violated")
    if probe.flags:
        flags.extend(probe.flags)
    digest = _digest("greedy-bound", getattr(model, "table", None), list(history),
                     list(targets), list(pool), budget)
    return BoundReport(lhs, rhs, slack, slack >= -SLACK_TOL, digest, flags)


def check_simulator_bound(
    p_table: LatentTable, q_table: LatentTable, targets, question_set,
    catalog: QuestionCatalog, cap: int = DEFAULT_SUPPORT_CAP,
) -> BoundReport:
    """Audit the transfer inequality between the model distribution p and a
    ground-truth distribution q.

    With Z the joint answer tuple over the targets and X the asked question
    set, the check compares the cross entropy of p(Z | X) under q against
    the p-entropy term minus sqrt(second-moment * chi-square) computed by
    exact enumeration.  Conditioning answers for X are marginalized under
    q, matching the transfer setting where feedback comes from the truth.
    """
    targets = list(targets)
    question_set = list(question_set)
    digest = _digest("simulator-bound", p_table, q_table, targets, question_set)

    q_z = joint_target_distribution(Belief.from_prior(q_table), targets, cap).probs

    if question_set:
        q_answers = joint_target_distribution(
            Belief.from_prior(q_table), question_set, cap
        )
        p_cond = np.zeros_like(q_z)
        for y_tuple, qy in zip(q_answers.support, q_answers.probs):
            if qy <= 0.0:
                continue
            hist = tuple(zip(question_set, y_tuple))
            try:
                p_cond += qy * joint_target_distribution(
                    belief_from_history(p_table, hist), targets, cap
                ).probs
            except ImpossibleEvidenceError:
                return BoundReport(
                    float("nan"), float("-inf"), float("inf"), True, digest,
                    ["vacuous: q-positive answers impossible under p"],
                )
    else:
        p_cond = joint_target_distribution(Belief.from_prior(p_table), targets, cap).probs

    if np.any((p_cond <= 0.0) & (q_z > 0.0)):
        return BoundReport(
            float("-inf"), float("-inf"), float("inf"), True, digest,
            ["vacuous: chi-square infinite (p assigns 0 where q is positive)"],
        )

    pos = p_cond > 0.0
    log_p = np.zeros_like(p_cond)
    log_p[pos] = np.log(p_cond[pos])
    lhs = float(np.sum(q_z[pos] * log_p[pos]))
    e_p_log = float(np.sum(p_cond[pos] * log_p[pos]))
    e_p_log2 = float(np.sum(p_cond[pos] * log_p[pos] ** 2))
    chi2 = float(np.sum((q_z[pos] - p_cond[pos]) ** 2 / p_cond[pos]))
    rhs = e_p_log - math.sqrt(e_p_log2 * chi2)
    slack = lhs - rhs
    return BoundReport(lhs, rhs, slack, slack >= -SLACK_TOL, digest)


def audit_simulator_bound(n_pairs: int = 100, seed: int = 0) -> dict:
    """Randomized audit: the transfer bound must hold (or be flagged
    vacuous) on every random (p, q) pair."""
    from .randgen import random_catalog, random_table

    rng = np.random.default_rng(seed)
    n_hold = 0
    n_vacuous = 0
    failures = []
    for _ in range(n_pairs):
        sizes = [int(rng.integers(2, 4)) for _ in range(4)]
        catalog = random_catalog(rng, sizes)
        m = int(rng.integers(2, 5))
        p_table = random_table(catalog, rng, m)
        q_table = random_table(catalog, rng, int(rng.integers(2, 5)))
        ids = catalog.ids
        n_questions = int(rng.integers(1, 3))
        report = check_simulator_bound(
            p_table, q_table, ids[2:4][: int(rng.integers(1, 3))],
            ids[:n_questions], catalog,
        )
        if report.holds:
            n_hold += 1
            if report.flags:
                n_vacuous += 1
        else:
            failures.append(report.instance_digest)
    return {
        "n_pairs": n_pairs,
        "n_hold": n_hold,
        "n_vacuous": n_vacuous,
        "failures": failures,
        "all_hold": n_hold == n_pairs,
    }


def audit_greedy_bound(
    n_instances: int = 100, seed: int = 0, n_probe_checks: int = 40,
    max_pool: int = 6, max_budget: int = 3,
) -> dict:
    """Randomized audit of the greedy (1 - 1/e) bound, asserted only on
    instances whose submodularity probe reports zero violations."""
    from .randgen import random_instance

    rng = np.random.default_rng(seed)
    n_gated = 0
    n_hold = 0
    probe_violating = 0
    failures = []
    for _ in range(n_instances):
        n_pool = int(rng.integers(2, max_pool + 1))
        catalog, table, pool, targets = random_instance(
            rng, max_latent=5, max_alphabet=3, n_pool=n_pool,
            n_targets=int(rng.integers(1, 3)),
        )
        budget = int(rng.integers(1, min(max_budget, n_pool) + 1))
        report = check_greedy_bound(
            table, (), targets, pool, budget,
            n_probe_checks=n_probe_checks,
            rng_seed=int(rng.integers(2**31)),
            catalog=catalog,
        )
        if "assumption-violated" in report.flags:
            probe_violating += 1
            continue
        n_gated += 1
        if report.holds:
            n_hold += 1
        else:
            failures.append(report.instance_digest)
    return {
        "n_instances": n_instances,
        "n_gated": n_gated,
        "n_probe_violating": probe_violating,
        "n_hold": n_hold,
        "failures": failures,
        "all_gated_hold": n_hold == n_gated,
    }
