"""Random small instances for audits and property tests."""

from __future__ import annotations

import numpy as np

from .catalog import Question, QuestionCatalog
from .model import LatentTable


def random_catalog(rng, alphabet_sizes: list[int]) -> QuestionCatalog:
    return QuestionCatalog(
        [
            Question(f"q{j}", f"Random question {j}", [f"a{k}" for k in range(a)])
            for j, a in enumerate(alphabet_sizes)
        ]
    )


def random_table(catalog: QuestionCatalog, rng, n_latent: int) -> LatentTable:
    """Dirichlet(1) prior and likelihood rows: strictly positive entries,
    so every history has positive probability."""
    prior = rng.dirichlet(np.ones(n_latent))
    prior = prior / prior.sum()
    likelihood = {
        q.id: rng.dirichlet(np.ones(q.n_choices), size=n_latent) for q in catalog
    }
    for mat in likelihood.values():
        mat /= mat.sum(axis=1, keepdims=True)
    return LatentTable([f"u{i}" for i in range(n_latent)], prior, likelihood)


def random_instance(
    rng, max_latent: int = 8, max_alphabet: int = 4,
    n_pool: int = 4, n_targets: int = 2,
):
    """(catalog, table, pool, targets) with random sizes up to the caps."""
    m = int(rng.integers(2, max_latent + 1))
    sizes = [int(rng.integers(2, max_alphabet + 1)) for _ in range(n_pool + n_targets)]
    catalog = random_catalog(rng, sizes)
    table = random_table(catalog, rng, m)
    ids = catalog.ids
    return catalog, table, ids[:n_pool], ids[n_pool:]


def random_history(
    catalog: QuestionCatalog, table: LatentTable, rng, max_len: int = 6, exclude=(),
):
    """History of distinct questions with answers sampled from the prior
    predictive chain (always possible evidence)."""
    from .model import Belief, posterior_update, predictive_distribution

    ids = [q for q in catalog.ids if q not in set(exclude)]
    length = int(rng.integers(0, min(max_len, len(ids)) + 1))
    picked = [ids[i] for i in rng.permutation(len(ids))[:length]]
    belief = Belief.from_prior(table)
    steps = []
    for qid in picked:
        probs = predictive_distribution(belief, qid).probs
        a = int(rng.choice(len(probs), p=probs / probs.sum()))
        steps.append((qid, a))
        belief = posterior_update(belief, qid, a)
    return tuple(steps)
