import json

import numpy as np
import pytest

from elicit.data import (
    Dataset,
    DatasetFormatError,
    SplitSpec,
    SyntheticConfig,
    dataset_from_obj,
    generate_synthetic,
    load_dataset,
    save_dataset,
    split_entities,
)

VALID_OBJ = {
    "questions": [
        {"id": "q1", "text": "First?", "choices": ["yes", "no"]},
        {"id": "q2", "text": "Second?", "choices": ["a", "b", "c"], "tags": ["t"]},
    ],
    "entities": [
        {"id": "e1", "answers": {"q1": 0, "q2": 2}},
        {"id": "e2", "answers": {"q1": 1}, "meta": {"note": "partial"}},
    ],
}


class TestSchema:
    def test_round_trip(self, tmp_path):
        ds = dataset_from_obj(VALID_OBJ)
        path = tmp_path / "ds.json"
        save_dataset(ds, path)
        again = load_dataset(path)
        assert again.to_obj() == ds.to_obj()

    def test_save_is_byte_deterministic(self, tmp_path):
        ds = generate_synthetic(SyntheticConfig(n_entities=10, n_questions=5, seed=3))
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_dataset(ds, p1)
        save_dataset(ds, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_top_level_key(self):
        with pytest.raises(DatasetFormatError, match="top level"):
            dataset_from_obj({"questions": []})

    def test_unknown_question_reference(self):
        obj = json.loads(json.dumps(VALID_OBJ))
        obj["entities"][0]["answers"]["nope"] = 0
        with pytest.raises(DatasetFormatError, match="unknown question"):
            dataset_from_obj(obj)

    def test_out_of_range_answer(self):
        obj = json.loads(json.dumps(VALID_OBJ))
        obj["entities"][0]["answers"]["q1"] = 5
        with pytest.raises(DatasetFormatError, match="out-of-range"):
            dataset_from_obj(obj)

    def test_duplicate_entity_id(self):
        obj = json.loads(json.dumps(VALID_OBJ))
        obj["entities"].append({"id": "e1", "answers": {}})
        with pytest.raises(DatasetFormatError, match="duplicate entity"):
            dataset_from_obj(obj)

    def test_bad_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(DatasetFormatError, match="not valid JSON"):
            load_dataset(path)

    def test_records_filter(self):
        ds = dataset_from_obj(VALID_OBJ)
        assert list(ds.records(["e2"])) == [("e2", "q1", 1)]
        assert len(list(ds.records())) == 3


class TestSplit:
    def test_sizes_and_partition(self):
        ds = generate_synthetic(SyntheticConfig(n_entities=20, n_questions=4, seed=0))
        train, val, test = split_entities(ds, SplitSpec(0.70, 0.15, 0.15, seed=1))
        assert (len(train), len(val), len(test)) == (14, 3, 3)
        all_ids = {e.id for e in ds.entities}
        assert set(train) | set(val) | set(test) == all_ids
        assert not (set(train) & set(val)) and not (set(val) & set(test))

    def test_floor_gives_remainder_to_test(self):
        ds = generate_synthetic(SyntheticConfig(n_entities=10, n_questions=3, seed=0))
        train, val, test = split_entities(ds, SplitSpec(0.55, 0.15, 0.30, seed=0))
        # floor(5.5)=5, floor(1.5)=1, remainder 4
        assert (len(train), len(val), len(test)) == (5, 1, 4)

    def test_seed_determinism(self):
        ds = generate_synthetic(SyntheticConfig(n_entities=12, n_questions=3, seed=0))
        a = split_entities(ds, SplitSpec(seed=5))
        b = split_entities(ds, SplitSpec(seed=5))
        c = split_entities(ds, SplitSpec(seed=6))
        assert a == b
        assert a != c

    def test_bad_fractions(self):
        ds = generate_synthetic(SyntheticConfig(n_entities=10, n_questions=3, seed=0))
        with pytest.raises(ValueError, match="sum to 1"):
            split_entities(ds, SplitSpec(0.9, 0.3, 0.1))

    def test_empty_part_rejected(self):
        ds = generate_synthetic(SyntheticConfig(n_entities=4, n_questions=3, seed=0))
        with pytest.raises(ValueError, match="empty"):
            split_entities(ds, SplitSpec(0.9, 0.05, 0.05, seed=0))


class TestSynthetic:
    def test_shapes_and_validity(self):
        config = SyntheticConfig(n_entities=30, n_questions=8, alphabet_size=3, seed=2)
        ds = generate_synthetic(config)
        assert len(ds.entities) == 30 and len(ds.catalog) == 8
        ds.validate()
        for q in ds.catalog:
            assert len(q.choices) == 3
            assert q.features is not None and len(q.features) == config.feature_dim
            assert np.linalg.norm(q.features) == pytest.approx(1.0, abs=1e-8)

    def test_seed_determinism(self):
        a = generate_synthetic(SyntheticConfig(n_entities=15, n_questions=5, seed=4))
        b = generate_synthetic(SyntheticConfig(n_entities=15, n_questions=5, seed=4))
        assert a.to_obj() == b.to_obj()

    def test_zero_noise_matches_cluster_prototype(self):
        ds = generate_synthetic(
            SyntheticConfig(n_entities=40, n_questions=6, noise=0.0, seed=1)
        )
        by_cluster = {}
        for e in ds.entities:
            c = e.meta["cluster"]
            if c in by_cluster:
                assert e.answers == by_cluster[c]
            else:
                by_cluster[c] = e.answers

    def test_full_noise_binary_is_coin_flip(self):
        # noise 1 with a binary alphabet must leave answers near 50/50
        ds = generate_synthetic(
            SyntheticConfig(
                n_entities=2000, n_questions=10, alphabet_size=2,
                n_latent_clusters=1, noise=1.0, seed=0,
            )
        )
        for q in ds.catalog:
            freq = np.mean([e.answers[q.id] for e in ds.entities])
            assert 0.45 < freq < 0.55

    def test_agreement_tags(self):
        ds = generate_synthetic(SyntheticConfig(n_entities=50, n_questions=6, seed=9))
        for q in ds.catalog:
            tag = next(t for t in q.tags if t.startswith("agreement:"))
            value = float(tag.split(":", 1)[1])
            assert 1 / 4 <= value <= 1.0  # at least the modal share of A=4

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SyntheticConfig(alphabet_size=1).validate()
        with pytest.raises(ValueError):
            SyntheticConfig(noise=1.5).validate()
