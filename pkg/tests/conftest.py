"""Shared fixtures: a deterministic synthetic corpus, facts, and indexes."""

from __future__ import annotations

import pytest

from contracheck.corpus import BlockFilter, CorpusSnapshot, ingest_snapshot
from contracheck.embedding import HashEmbedder, build_index
from contracheck.facts import AtomicFact, fact_from_block

CITIES = (
    "Arlen", "Bexley", "Corvall", "Dunmore", "Elkford",
    "Farrow", "Gildern", "Halvern", "Ironvale", "Jessup",
)

CATEGORIES = ("history", "geography", "science", "culture")


def make_corpus_records(n: int = 30, sections: bool = False) -> list[dict]:
    """Distinct single-sentence passages, one document each, 100-320 chars.

    Every text contains a number, a four-digit year, and a mid-sentence
    capitalized entity so all mutation operators apply.
    """
    records = []
    for i in range(n):
        # decorate the city so every block has a unique subject token
        city = f"{CITIES[i % len(CITIES)]}{i // len(CITIES)}"
        year = 1800 + (i * 3) % 200
        visitors = 1200 + i * 37
        text = (
            f"The annual harvest festival of {city} district number {i} was first"
            f" held in {year} and attracts about {visitors} visitors, according to"
            f" the regional chronicle of events."
        )
        record = {
            "doc_title": f"Festival {i}",
            "kind": "passage",
            "text": text,
            "category": CATEGORIES[i % len(CATEGORIES)],
        }
        if sections:
            record["section_path"] = ["History"]
        records.append(record)
    return records


def make_snapshot(n: int = 30, **kwargs) -> CorpusSnapshot:
    return ingest_snapshot(
        make_corpus_records(n, **kwargs), BlockFilter(100, 320), snapshot_date="2024-11-01"
    )


def facts_for(snapshot: CorpusSnapshot) -> list[AtomicFact]:
    return [fact_from_block(b, b.text) for b in snapshot.blocks.values()]


@pytest.fixture
def snapshot() -> CorpusSnapshot:
    return make_snapshot(30)


@pytest.fixture
def embedder() -> HashEmbedder:
    return HashEmbedder(dim=128)


@pytest.fixture
def index(snapshot, embedder):
    return build_index(list(snapshot.blocks.values()), embedder)


@pytest.fixture
def facts(snapshot) -> list[AtomicFact]:
    return facts_for(snapshot)
