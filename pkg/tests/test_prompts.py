import json

import pytest

from hoiforge.errors import SchemaError, ValidationError
from hoiforge.prompts import (
    DEFAULT_RETENTION_RATE,
    build_generation_plan,
    compose_prompt,
    generate_prompts,
    parse_prompt_triplets,
    sample_cooccurring,
)
from hoiforge.vocabulary import (
    CoOccurrenceTable,
    load_attributes,
    load_cooccurrence,
    load_vocabulary,
)

from conftest import write_vocab_file


class TestVocabularyLoading:
    def test_load_round_trip(self, vocab_file):
        vocab = load_vocabulary(vocab_file)
        assert vocab.num_categories == 5
        assert vocab.num_object_classes == 4
        assert vocab.entry(0).verb_ing == "riding"
        assert vocab.object_class_of(1) == 2

    def test_minimal_vocabulary(self, tmp_path):
        path = tmp_path / "one.json"
        path.write_text(json.dumps([{"hoi_id": 0, "verb": "ride", "verb_ing": "riding", "object": "bicycle", "object_id": 0}]))
        vocab = load_vocabulary(path)
        assert vocab.num_categories == 1
        assert vocab.num_object_classes >= 1

    def test_duplicate_pair_rejected(self, tmp_path):
        path = tmp_path / "dup.json"
        path.write_text(
            json.dumps(
                [
                    {"hoi_id": 0, "verb": "ride", "verb_ing": "riding", "object": "bicycle", "object_id": 0},
                    {"hoi_id": 1, "verb": "ride", "verb_ing": "riding", "object": "bicycle", "object_id": 0},
                ]
            )
        )
        with pytest.raises(ValidationError):
            load_vocabulary(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "dupid.json"
        path.write_text(
            json.dumps(
                [
                    {"hoi_id": 0, "verb": "ride", "verb_ing": "riding", "object": "bicycle", "object_id": 0},
                    {"hoi_id": 0, "verb": "hold", "verb_ing": "holding", "object": "cup", "object_id": 1},
                ]
            )
        )
        with pytest.raises(ValidationError):
            load_vocabulary(path)

    def test_parse_error_names_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('[\n{"hoi_id": 0,}\n]')
        with pytest.raises(SchemaError, match="line"):
            load_vocabulary(path)

    def test_missing_field_named(self, tmp_path):
        path = tmp_path / "missing.json"
        path.write_text(json.dumps([{"hoi_id": 0, "verb": "ride", "object": "bicycle", "object_id": 0}]))
        with pytest.raises(SchemaError, match="verb_ing"):
            load_vocabulary(path)


class TestAttributeLoading:
    def test_load(self, attrs_file):
        attrs = load_attributes(attrs_file)
        assert attrs.race == ["asian"]
        assert len(attrs.negative) == 5

    def test_empty_slot_rejected(self, tmp_path):
        path = tmp_path / "attrs.json"
        path.write_text(json.dumps({k: ["x"] for k in ("race", "age_gender", "environment", "quality", "lighting", "view", "camera")} | {"negative": []}))
        with pytest.raises(ValidationError):
            load_attributes(path)

    def test_blank_string_rejected(self, tmp_path):
        path = tmp_path / "attrs.json"
        data = {k: ["x"] for k in ("race", "age_gender", "environment", "quality", "lighting", "view", "camera")}
        data["negative"] = ["  "]
        path.write_text(json.dumps(data))
        with pytest.raises(ValidationError):
            load_attributes(path)


class TestComposePrompt:
    def test_single_triplet_exact_text(self, vocab, attrs_single):
        p = compose_prompt([0], vocab, attrs_single, seed=99)
        assert p.positive_text == (
            "a asian young woman riding a bicycle, in a sunny park, "
            "high quality, soft lighting, side view, 35mm photo"
        )
        assert p.triplet_ids == [0]
        assert p.seed == 99

    def test_an_before_vowel(self, vocab, attrs_single):
        p = compose_prompt([1], vocab, attrs_single, seed=0)
        assert "holding an umbrella" in p.positive_text

    def test_deterministic_under_seed(self, vocab, attrs_multi):
        a = compose_prompt([0, 2], vocab, attrs_multi, seed=777)
        b = compose_prompt([0, 2], vocab, attrs_multi, seed=777)
        assert a == b
        c = compose_prompt([0, 2], vocab, attrs_multi, seed=778)
        assert c != a  # overwhelmingly likely with multi-valued slots

    def test_two_triplets_two_person_clauses(self, vocab, attrs_multi):
        p = compose_prompt([0, 1], vocab, attrs_multi, seed=5)
        assert p.positive_text.count("riding a bicycle") == 1
        assert p.positive_text.count("holding an umbrella") == 1
        # person clauses + environment + 4 photographic slots
        assert len(p.positive_text.split(", ")) == 2 + 1 + 4

    def test_negative_text_sampled_from_negative_list(self, vocab, attrs_multi):
        p = compose_prompt([0], vocab, attrs_multi, seed=31)
        parts = p.negative_text.split(", ")
        assert len(parts) == 5
        assert len(set(parts)) == 5
        assert all(part in attrs_multi.negative for part in parts)

    def test_model_config_sampled_per_key(self, vocab, attrs_single):
        options = {"steps": [30, 40, 50], "cfg_scale": [5.0, 7.5, 9.0]}
        p = compose_prompt([0], vocab, attrs_single, seed=2, model_config_options=options)
        assert p.model_config["steps"] in options["steps"]
        assert p.model_config["cfg_scale"] in options["cfg_scale"]
        again = compose_prompt([0], vocab, attrs_single, seed=2, model_config_options=options)
        assert again.model_config == p.model_config

    def test_unknown_triplet_rejected(self, vocab, attrs_single):
        with pytest.raises(KeyError):
            compose_prompt([99], vocab, attrs_single, seed=0)
        with pytest.raises(ValueError):
            compose_prompt([], vocab, attrs_single, seed=0)

    def test_round_trip_recovers_triplets(self, vocab, attrs_multi):
        for seed in range(20):
            triplets = [0, 1] if seed % 2 else [2]
            p = compose_prompt(triplets, vocab, attrs_multi, seed=seed)
            assert parse_prompt_triplets(p.positive_text, vocab) == triplets


class TestSampleCooccurring:
    def test_empty_table_returns_singleton(self):
        assert sample_cooccurring(CoOccurrenceTable(), anchor=5, k=3, seed=1) == [5]

    def test_single_positive_partner(self):
        table = CoOccurrenceTable()
        table.set_count(0, 1, 10)
        table.set_count(0, 2, 0)
        assert sample_cooccurring(table, anchor=0, k=2, seed=123) == [0, 1]

    def test_zero_count_never_sampled(self):
        table = CoOccurrenceTable()
        table.set_count(0, 1, 3)
        table.set_count(0, 2, 0)
        table.set_count(0, 3, 2)
        for seed in range(500):
            out = sample_cooccurring(table, anchor=0, k=4, seed=seed)
            assert 2 not in out
            assert out[0] == 0
            assert len(out) == len(set(out))

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            sample_cooccurring(CoOccurrenceTable(), anchor=0, k=0, seed=0)

    def test_proportional_sampling_monte_carlo(self):
        # counts 9:1 -> partner 1 should appear with frequency 0.9 +/- 0.01
        table = CoOccurrenceTable()
        table.set_count(0, 1, 9)
        table.set_count(0, 2, 1)
        hits = sum(1 for seed in range(100_000) if sample_cooccurring(table, 0, 2, seed)[1] == 1)
        assert hits / 100_000 == pytest.approx(0.9, abs=0.01)

    def test_symmetry_of_table(self):
        table = CoOccurrenceTable()
        table.set_count(3, 7, 4)
        assert table.count(7, 3) == 4
        assert table.count(3, 7) == 4


class TestGenerationPlan:
    def test_already_balanced_category_needs_nothing(self):
        plan = build_generation_plan({7: 60}, target_min=50, retention_rate=0.5)
        assert plan.per_category[7] == 0

    def test_hand_computed_ceiling(self):
        plan = build_generation_plan({3: 0}, target_min=50, retention_rate=0.5)
        assert plan.per_category[3] == 100

    def test_default_retention_matches_observed_ratio(self):
        assert DEFAULT_RETENTION_RATE == pytest.approx(0.5649, abs=5e-5)

    def test_plan_sufficiency_property(self):
        import random

        rnd = random.Random(4)
        counts = [rnd.randrange(0, 120) for _ in range(600)]
        plan = build_generation_plan(counts, target_min=50, retention_rate=DEFAULT_RETENTION_RATE)
        for c, have in enumerate(counts):
            assert have + plan.per_category[c] * DEFAULT_RETENTION_RATE >= 50 or have >= 50

    def test_bad_retention_rejected(self):
        with pytest.raises(ValueError):
            build_generation_plan({0: 0}, target_min=50, retention_rate=0.0)
        with pytest.raises(ValueError):
            build_generation_plan({0: 0}, target_min=50, retention_rate=1.2)


class TestGeneratePrompts:
    def test_counts_follow_plan_and_reproducible(self, vocab, attrs_multi):
        table = CoOccurrenceTable()
        table.set_count(0, 3, 5)
        plan = build_generation_plan({0: 49, 1: 50, 2: 48, 3: 50, 4: 50}, target_min=50, retention_rate=1.0)
        run1 = generate_prompts(vocab, attrs_multi, table, plan, seed=11)
        run2 = generate_prompts(vocab, attrs_multi, table, plan, seed=11)
        assert [p.to_dict() for p in run1.prompts] == [p.to_dict() for p in run2.prompts]
        assert len(run1.prompts) == 1 + 2  # shortfall 1 for cat 0, 2 for cat 2
        anchors = [p.triplet_ids[0] for p in run1.prompts]
        assert anchors == [0, 2, 2]
        assert run1.meta["max_triplets_per_prompt"] == 2

    def test_stable_jsonl_field_order(self, vocab, attrs_single):
        table = CoOccurrenceTable()
        plan = build_generation_plan({0: 0}, target_min=1, retention_rate=1.0)
        run = generate_prompts(vocab, attrs_single, table, plan, seed=0)
        line = json.dumps(run.prompts[0].to_dict())
        keys = list(json.loads(line).keys())
        assert keys == ["positive_text", "negative_text", "triplet_ids", "seed", "model_config"]


def test_cooccurrence_file_round_trip(tmp_path):
    path = tmp_path / "cooc.json"
    path.write_text(json.dumps([{"a": 0, "b": 1, "count": 4}, {"a": 2, "b": 0, "count": 1}]))
    table = load_cooccurrence(path)
    assert table.count(1, 0) == 4
    assert table.partners(0) == [(1, 4), (2, 1)]


def test_cooccurrence_duplicate_pair_rejected(tmp_path):
    path = tmp_path / "cooc.json"
    path.write_text(json.dumps([{"a": 0, "b": 1, "count": 4}, {"a": 1, "b": 0, "count": 2}]))
    with pytest.raises(ValidationError):
        load_cooccurrence(path)


def test_vocab_file_six_hundred_categories(tmp_path):
    # a full-size vocabulary parses and reports the expected category count
    from hoiforge.vocabulary import TripletEntry

    entries = [TripletEntry(i, f"verb{i}", f"verb{i}ing", f"object{i % 80}_{i // 80}", i % 80) for i in range(600)]
    path = tmp_path / "vocab600.json"
    write_vocab_file(path, entries)
    vocab = load_vocabulary(path)
    assert vocab.num_categories == 600
