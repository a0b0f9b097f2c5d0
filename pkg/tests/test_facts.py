"""Fact extraction parsing and the faithfulness screen."""

import pytest

from contracheck.errors import ExtractionError
from contracheck.facts import (
    compute_fact_id,
    extract_facts,
    fact_from_block,
    faithfulness_check,
    load_facts,
    save_facts,
    screen_faithfulness,
)
from contracheck.llm import ScriptedProvider

from conftest import make_snapshot


@pytest.fixture
def block():
    return next(iter(make_snapshot(3).blocks.values()))


class TestExtractFacts:
    def test_one_fact_per_line_in_order(self, block):
        provider = ScriptedProvider().set_default(
            "fact_extraction",
            "<facts>\nA was born in 1900.\nA died in 1970.\n</facts>",
        )
        facts = extract_facts(block, provider)
        assert [f.claim_text for f in facts] == ["A was born in 1900.", "A died in 1970."]
        assert all(f.source_block_id == block.block_id for f in facts)
        assert all(f.context_text == block.text for f in facts)
        assert all(f.context_title == block.full_title for f in facts)
        assert all(f.source_doc_title == block.doc_title for f in facts)

    def test_empty_region_warns_and_returns_empty(self, block):
        provider = ScriptedProvider().set_default("fact_extraction", "<facts></facts>")
        with pytest.warns(UserWarning, match="zero facts"):
            assert extract_facts(block, provider) == []

    def test_missing_region_is_extraction_error(self, block):
        provider = ScriptedProvider().set_default("fact_extraction", "no tags at all")
        with pytest.raises(ExtractionError):
            extract_facts(block, provider)

    def test_ids_stable_across_reruns(self, block):
        provider = ScriptedProvider().set_default(
            "fact_extraction", "<facts>\nfact one.\nfact two.\n</facts>"
        )
        first = extract_facts(block, provider)
        second = extract_facts(block, provider)
        assert [f.fact_id for f in first] == [f.fact_id for f in second]
        assert first[0].fact_id != first[1].fact_id

    def test_fact_id_depends_on_block_and_ordinal(self):
        assert compute_fact_id("b1", 0) != compute_fact_id("b1", 1)
        assert compute_fact_id("b1", 0) != compute_fact_id("b2", 0)


class TestFaithfulness:
    def test_verbatim_fact_judged_faithful(self, block):
        fact = fact_from_block(block, block.text)
        provider = ScriptedProvider().set_default("faithfulness", "<faithful>yes</faithful>")
        assert faithfulness_check(fact, provider) is True
        assert fact.faithful is True

    def test_contradicting_fact_judged_unfaithful(self, block):
        fact = fact_from_block(block, "the opposite of the block")
        provider = ScriptedProvider().set_default("faithfulness", "<faithful>no</faithful>")
        assert faithfulness_check(fact, provider) is False
        assert fact.faithful is False

    def test_empty_context_is_precondition_error(self, block):
        fact = fact_from_block(block, "claim")
        fact.context_text = ""
        with pytest.raises(ExtractionError):
            faithfulness_check(fact, ScriptedProvider())

    def test_unparseable_judgment_leaves_fact_unset(self, block):
        fact = fact_from_block(block, "claim")
        provider = ScriptedProvider().set_default("faithfulness", "probably fine")
        with pytest.raises(ExtractionError):
            faithfulness_check(fact, provider)
        assert fact.faithful is None


def test_unfaithful_facts_never_reach_a_dataset_build(block):
    facts = [fact_from_block(block, f"claim {i}", ordinal=i) for i in range(3)]
    provider = ScriptedProvider().push(
        "faithfulness",
        "<faithful>yes</faithful>",
        "<faithful>no</faithful>",
        "<faithful>yes</faithful>",
    )
    kept = screen_faithfulness(facts, provider)
    assert [f.claim_text for f in kept] == ["claim 0", "claim 2"]
    assert facts[1].faithful is False  # judged, recorded, excluded


def test_facts_file_round_trip(tmp_path, block):
    facts = [fact_from_block(block, f"claim {i}", ordinal=i) for i in range(3)]
    facts[0].faithful = True
    save_facts(facts, tmp_path / "facts.jsonl")
    assert load_facts(tmp_path / "facts.jsonl") == facts
