"""Atomic fact extraction.

Decomposes a block into short self-contained claims via the extraction
prompt, parses the tagged response, and optionally screens each claim for
faithfulness against its source block. The faithfulness screen is an
automated proxy judgment, labeled as such.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .corpus import Block
from .errors import ExtractionError, TagParseError
from .llm import DecodingConfig, LlmProvider, RunLog, call_template, extract_tagged
from . import templates


@dataclass
class AtomicFact:
    """A single verifiable claim tied to the block it came from."""

    fact_id: str
    claim_text: str
    source_block_id: str
    source_doc_title: str
    context_title: str
    context_text: str
    faithful: bool | None = None

    def to_record(self) -> dict:
        return {
            "fact_id": self.fact_id,
            "claim_text": self.claim_text,
            "source_block_id": self.source_block_id,
            "source_doc_title": self.source_doc_title,
            "context_title": self.context_title,
            "context_text": self.context_text,
            "faithful": self.faithful,
        }

    @classmethod
    def from_record(cls, record: dict) -> "AtomicFact":
        return cls(**record)


def compute_fact_id(source_block_id: str, ordinal: int) -> str:
    """Stable id from (source block, line ordinal); reruns are id-stable."""
    key = f"{source_block_id}\x1f{ordinal}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def fact_from_block(block: Block, claim_text: str, ordinal: int = 0) -> AtomicFact:
    return AtomicFact(
        fact_id=compute_fact_id(block.block_id, ordinal),
        claim_text=claim_text,
        source_block_id=block.block_id,
        source_doc_title=block.doc_title,
        context_title=block.full_title,
        context_text=block.text,
    )


def extract_facts(
    block: Block,
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> list[AtomicFact]:
    """One AtomicFact per non-empty line of the response's <facts> region,
    in response order, each carrying the block's context."""
    if not block.text:
        raise ExtractionError(f"block {block.block_id} has empty text")
    response = call_template(
        provider,
        templates.FACT_EXTRACTION,
        {"title": block.full_title, "text": block.text},
        decoding=decoding,
        context={"block_id": block.block_id},
        run_log=run_log,
    )
    try:
        region = extract_tagged(response, "facts")
    except TagParseError as exc:
        raise ExtractionError(
            f"no <facts> region in extraction response for block {block.block_id}"
        ) from exc
    lines = [line.strip() for line in region.splitlines() if line.strip()]
    if not lines:
        warnings.warn(f"extraction produced zero facts for block {block.block_id}", stacklevel=2)
        return []
    return [fact_from_block(block, line, ordinal) for ordinal, line in enumerate(lines)]


def faithfulness_check(
    fact: AtomicFact,
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> bool:
    """True iff the provider judges the claim entailed by its source block.

    Sets fact.faithful on success; an unparseable judgment raises and leaves
    the fact unset.
    """
    if not fact.context_text:
        raise ExtractionError(
            f"fact {fact.fact_id} has no context text", stage="faithfulness-check"
        )
    response = call_template(
        provider,
        templates.FAITHFULNESS,
        {"claim": fact.claim_text, "title": fact.context_title, "context": fact.context_text},
        decoding=decoding,
        context={"claim_text": fact.claim_text, "fact_id": fact.fact_id},
        run_log=run_log,
    )
    try:
        verdict = extract_tagged(response, "faithful").lower()
    except TagParseError as exc:
        raise ExtractionError(
            f"unparseable faithfulness judgment for fact {fact.fact_id}",
            stage="faithfulness-check",
        ) from exc
    if verdict not in ("yes", "no"):
        raise ExtractionError(
            f"faithfulness judgment must be yes/no, got {verdict!r}",
            stage="faithfulness-check",
        )
    fact.faithful = verdict == "yes"
    return fact.faithful


def screen_faithfulness(
    facts: Iterable[AtomicFact],
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> list[AtomicFact]:
    """Keep only facts the faithfulness proxy judges entailed by their source.

    Facts failing the screen never reach a downstream dataset build.
    """
    return [
        fact
        for fact in facts
        if faithfulness_check(fact, provider, decoding=decoding, run_log=run_log)
    ]


def save_facts(facts: Iterable[AtomicFact], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for fact in facts:
            fh.write(json.dumps(fact.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def load_facts(path: str | Path) -> list[AtomicFact]:
    with open(path, encoding="utf-8") as fh:
        return [AtomicFact.from_record(json.loads(line)) for line in fh if line.strip()]
