"""Mutation operators, taxonomy sampling, and injection invariants."""

import hashlib
import json
import random

import pytest

from contracheck.corpus import allocate_largest_remainder
from contracheck.errors import MutationError
from contracheck.llm import LlmRequest, OracleNliProvider, extract_tagged, normalize_ws
from contracheck.synth import (
    DEFAULT_DISTRIBUTION,
    MUTATION_TYPES,
    InjectedCase,
    apply_mutation,
    applicable,
    cases_to_labeled,
    inject,
    load_cases,
    refutation_map,
    sample_mutation_type,
    save_cases,
    validate_distribution,
)

from conftest import facts_for, make_snapshot


class TestOperators:
    def test_off_by_one_on_year(self):
        assert apply_mutation("numerical_off_by_one", "A was born in 1492.", {"delta": 1}) == (
            "A was born in 1493."
        )

    def test_clear_numerical_shift(self):
        mutated = apply_mutation(
            "numerical_clear", "the title was created in 1515", {"delta": -23}
        )
        assert mutated == "the title was created in 1492"

    def test_direct_negation(self):
        mutated = apply_mutation("logical_direct", "X is the capital of Y.", {})
        assert mutated == "X is not the capital of Y."

    def test_negation_without_auxiliary_wraps(self):
        mutated = apply_mutation("logical_direct", "Seven hills surround the town.", {})
        assert mutated.startswith("It is not the case that")

    def test_named_entity_replacement(self):
        mutated = apply_mutation(
            "named_entity", "The festival of Bexley draws crowds.", {"replacement": "Varkell"}
        )
        assert "Varkell" in mutated and "Bexley" not in mutated

    def test_spatial_direction_swap(self):
        mutated = apply_mutation("spatial", "The river flows north of the town.", {})
        assert "south" in mutated and " north " not in f" {mutated} "

    def test_temporal_shift_targets_year(self):
        mutated = apply_mutation("temporal", "Completed in 1900 after 12 years.", {"delta": 5})
        assert "1905" in mutated
        assert "12 years" in mutated  # the non-year number is untouched

    def test_every_operator_changes_the_text(self):
        text = "The grand bridge of Halvern was finished in 1901 and spans 300 meters."
        rng = random.Random(0)
        from contracheck.synth import _sample_params

        for mutation_type in MUTATION_TYPES:
            assert applicable(mutation_type, text)
            params = _sample_params(mutation_type, text, rng, "case-tag")
            assert apply_mutation(mutation_type, text, params) != text

    def test_inapplicable_raises(self):
        with pytest.raises(MutationError):
            apply_mutation("numerical_off_by_one", "no digits here", {"delta": 1})

    def test_applicability_predicates(self):
        assert applicable("numerical_clear", "has 42 things") is True
        assert applicable("numerical_clear", "has no numbers") is False
        assert applicable("temporal", "since 1999") is True
        assert applicable("temporal", "chapter 42") is False
        assert applicable("named_entity", "the Bexley fair") is True
        assert applicable("named_entity", "no names here") is False
        assert applicable("logical_direct", "anything") is True


class TestDistribution:
    def test_default_distribution_is_normalized(self):
        validate_distribution(DEFAULT_DISTRIBUTION)
        assert sum(DEFAULT_DISTRIBUTION.values()) == pytest.approx(1.0, abs=1e-12)

    def test_default_matches_taxonomy_shares(self):
        d = DEFAULT_DISTRIBUTION
        assert d["numerical_off_by_one"] + d["numerical_clear"] == pytest.approx(0.547)
        assert d["logical_direct"] + d["logical_indirect"] == pytest.approx(0.175)
        assert d["definition"] == 0.106
        assert d["temporal"] == 0.079
        assert d["named_entity"] == 0.060
        assert d["categorical"] == 0.021
        assert d["spatial"] == 0.012

    def test_degenerate_distribution(self):
        rng = random.Random(0)
        draws = {sample_mutation_type({"logical_direct": 1.0}, rng) for _ in range(50)}
        assert draws == {"logical_direct"}

    def test_unnormalized_rejected(self):
        with pytest.raises(MutationError):
            sample_mutation_type({"logical_direct": 0.9}, random.Random(0))

    def test_unknown_type_rejected(self):
        with pytest.raises(MutationError):
            validate_distribution({"typo_mutation": 1.0})

    def test_empirical_frequencies_track_weights(self):
        rng = random.Random(99)
        counts = {t: 0 for t in MUTATION_TYPES}
        n = 20_000
        for _ in range(n):
            counts[sample_mutation_type(DEFAULT_DISTRIBUTION, rng)] += 1
        for mutation_type, weight in DEFAULT_DISTRIBUTION.items():
            assert counts[mutation_type] / n == pytest.approx(weight, abs=0.015)


def snapshot_digest(snapshot):
    payload = json.dumps(
        [b.to_record() for b in snapshot.blocks.values()], sort_keys=True
    )
    return hashlib.sha256(payload.encode()).hexdigest()


class TestInject:
    def test_deterministic_under_seed(self):
        snapshot = make_snapshot(40)
        facts = facts_for(snapshot)
        mutated_a, cases_a = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=12, seed=3)
        mutated_b, cases_b = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=12, seed=3)
        assert snapshot_digest(mutated_a) == snapshot_digest(mutated_b)
        assert [c.to_record() for c in cases_a] == [c.to_record() for c in cases_b]
        mutated_c, _ = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=12, seed=4)
        assert snapshot_digest(mutated_a) != snapshot_digest(mutated_c)

    def test_type_counts_follow_largest_remainder(self):
        snapshot = make_snapshot(60)
        facts = facts_for(snapshot)
        n = 50
        _, cases = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=n, seed=1)
        expected = allocate_largest_remainder(DEFAULT_DISTRIBUTION, n)
        got: dict = {}
        for case in cases:
            got[case.mutation.type] = got.get(case.mutation.type, 0) + 1
        assert got == {k: v for k, v in expected.items() if v}

    def test_mutated_block_lives_in_a_different_document(self):
        snapshot = make_snapshot(30)
        facts = facts_for(snapshot)
        _, cases = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=10, seed=2)
        for case in cases:
            assert case.mutated_block.doc_title != case.fact.source_doc_title

    def test_removing_injected_blocks_restores_original(self):
        snapshot = make_snapshot(30)
        facts = facts_for(snapshot)
        mutated, cases = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=10, seed=2)
        injected_ids = {c.mutated_block.block_id for c in cases}
        injected_ids |= {b.block_id for c in cases for b in c.support_blocks}
        assert set(mutated.blocks) - injected_ids == set(snapshot.blocks)
        for block_id in snapshot.blocks:
            assert mutated.blocks[block_id] == snapshot.blocks[block_id]

    def test_every_case_is_detectable_in_principle(self):
        snapshot = make_snapshot(40)
        facts = facts_for(snapshot)
        _, cases = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=15, seed=5)
        oracle = OracleNliProvider(refutation_map(cases))
        for case in cases:
            claim_tokens = set(normalize_ws(case.fact.claim_text).lower().split())
            block_tokens = set(normalize_ws(case.mutated_block.text).lower().split())
            assert claim_tokens & block_tokens, "mutated block shares no token with the fact"
            response = oracle.complete(
                LlmRequest(
                    prompt="p",
                    template_name="nli_classify",
                    context={
                        "claim_text": case.fact.claim_text,
                        "passage_text": case.mutated_block.text,
                    },
                )
            )
            assert extract_tagged(response, "label") == "REFUTES"

    def test_exhausting_mutable_facts_reports_achievable(self):
        snapshot = make_snapshot(6)
        facts = facts_for(snapshot)
        for fact in facts:
            fact.claim_text = "no digits in this claim at all"
        with pytest.raises(MutationError, match="achievable"):
            inject(snapshot, facts, {"numerical_clear": 1.0}, n=3, seed=0)

    def test_n_larger_than_facts(self):
        snapshot = make_snapshot(5)
        facts = facts_for(snapshot)
        with pytest.raises(MutationError):
            inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=6, seed=0)

    def test_indirect_logical_builds_two_block_chain(self):
        snapshot = make_snapshot(20)
        facts = facts_for(snapshot)
        mutated, cases = inject(snapshot, facts, {"logical_indirect": 1.0}, n=2, seed=8)
        for case in cases:
            assert len(case.support_blocks) == 1
            assert case.support_blocks[0].block_id in mutated.blocks
            assert case.mutated_block.block_id in mutated.blocks
            assert "If " in case.support_blocks[0].text
            assert "not" in case.mutated_block.text


class TestCasesIo:
    def test_round_trip(self, tmp_path):
        snapshot = make_snapshot(25)
        facts = facts_for(snapshot)
        _, cases = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=8, seed=6)
        save_cases(cases, tmp_path / "cases.jsonl")
        loaded = load_cases(tmp_path / "cases.jsonl")
        assert [c.to_record() for c in loaded] == [c.to_record() for c in cases]

    def test_labeled_conversion(self):
        snapshot = make_snapshot(25)
        facts = facts_for(snapshot)
        _, cases = inject(snapshot, facts, DEFAULT_DISTRIBUTION, n=5, seed=6)
        injected_ids = {c.fact.fact_id for c in cases}
        clean = [f for f in facts if f.fact_id not in injected_ids][:5]
        labeled = cases_to_labeled(cases, clean)
        assert sum(1 for l in labeled if l.gold_label == "inconsistent") == 5
        assert sum(1 for l in labeled if l.gold_label == "consistent") == 5
        for item in labeled:
            if item.gold_label == "inconsistent":
                assert item.evidence_block_ids
                assert item.inconsistency_type in MUTATION_TYPES
