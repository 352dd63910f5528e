import math

import numpy as np
import pytest

from elicit.catalog import Question, QuestionCatalog
from elicit.policy import (
    MctsConfig,
    PolicyConfig,
    select_greedy,
    select_mcts,
    select_random,
    select_similarity,
)

LN2 = math.log(2.0)


def featured_catalog():
    return QuestionCatalog(
        [
            Question("qa", "qa", ["y", "n"], features=np.array([1.0, 0.0])),
            Question("qb", "qb", ["y", "n"], features=np.array([0.0, 1.0])),
            Question("qc", "qc", ["y", "n"], features=np.array([0.6, 0.8])),
            Question("qt", "qt", ["y", "n"], features=np.array([0.8, 0.6])),
        ]
    )


class TestRandom:
    def test_member_and_deterministic(self):
        pool = ["a", "b", "c"]
        rng = np.random.default_rng(4)
        pick = select_random(pool, np.random.default_rng(4))
        assert pick in pool
        assert pick == select_random(pool, rng)

    def test_empty_pool(self):
        with pytest.raises(ValueError, match="empty"):
            select_random([], np.random.default_rng(0))

    def test_covers_pool(self):
        rng = np.random.default_rng(0)
        picks = {select_random(["a", "b", "c"], rng) for _ in range(100)}
        assert picks == {"a", "b", "c"}


class TestSimilarity:
    def test_highest_dot_product_wins(self):
        catalog = featured_catalog()
        # dot products with qt=(0.8, 0.6): qa=0.8, qb=0.6, qc=0.96
        assert select_similarity(["qa", "qb", "qc"], ["qt"], catalog) == "qc"

    def test_mean_over_targets(self):
        catalog = featured_catalog()
        # mean of qa and qb targets is (0.5, 0.5): qc scores 0.7, qt 0.7,
        # exact tie goes to the lower catalog index
        assert select_similarity(["qt", "qc"], ["qa", "qb"], catalog) == "qc"

    def test_missing_features_rejected(self, r1):
        catalog, _ = r1
        with pytest.raises(ValueError, match="feature"):
            select_similarity(["qSkew"], ["qDet"], catalog)


class TestGreedy:
    def test_picks_resolving_question(self, r1_model):
        qid, est = select_greedy(r1_model, (), ["qDet"], ["qNoise", "qSkew", "qDet2"])
        assert qid == "qDet2"
        assert est.value == pytest.approx(LN2, abs=1e-12)

    def test_tie_breaks_to_lowest_index(self, r1_model):
        qid, _ = select_greedy(r1_model, (), ["qDet"], ["qSkew2", "qSkew"])
        assert qid == "qSkew"

    def test_history_shrinks_gain(self, r1_model):
        _, fresh = select_greedy(r1_model, (), ["qDet"], ["qSkew2"])
        _, after = select_greedy(r1_model, (("qSkew", 0),), ["qDet"], ["qSkew2"])
        assert after.value < fresh.value

    def test_pool_overlap_rejected(self, r1_model):
        with pytest.raises(ValueError, match="overlaps"):
            select_greedy(r1_model, (("qSkew", 0),), ["qDet"], ["qSkew"])


class TestMcts:
    def test_deterministic(self, r1_model):
        pool = ["qNoise", "qSkew", "qDet2", "qSkew2"]
        a = select_mcts(r1_model, (), ["qDet"], pool, rng_seed=9)
        b = select_mcts(r1_model, (), ["qDet"], pool, rng_seed=9)
        assert a == b

    def test_prefers_resolving_question(self, r1_model):
        pool = ["qNoise", "qSkew", "qDet2", "qSkew2"]
        qid, scores = select_mcts(r1_model, (), ["qDet"], pool, rng_seed=0)
        assert qid == "qDet2"
        assert scores["qDet2"] == pytest.approx(LN2, abs=1e-9)

    def test_shortlist_size(self, r1_model):
        pool = ["qNoise", "qSkew", "qDet2", "qSkew2", "qNoise2"]
        _, scores = select_mcts(
            r1_model, (), ["qDet"], pool, MctsConfig(top_k=2), rng_seed=0
        )
        assert len(scores) == 2

    def test_exact_first_step_variant(self, r1_model):
        pool = ["qNoise", "qSkew", "qSkew2"]
        config = MctsConfig(top_k=3, n_rollouts=4, depth=2, exact_first_step=True)
        qid, scores = select_mcts(r1_model, (), ["qDet"], pool, config, rng_seed=1)
        assert qid in pool
        # noise contributes nothing at the root, skew questions do
        assert scores["qSkew"] > scores["qNoise"] - 1e-9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MctsConfig(top_k=0).validate()
        with pytest.raises(ValueError):
            PolicyConfig(kind="banana").validate()
