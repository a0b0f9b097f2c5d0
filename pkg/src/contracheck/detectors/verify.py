"""Verification: score a fact against gathered evidence in one provider call."""

from __future__ import annotations

import warnings
from typing import Iterable

from ..embedding import EvidenceItem
from ..errors import TagParseError, VerificationError
from ..facts import AtomicFact
from ..llm import DecodingConfig, LlmProvider, RunLog, call_template, extract_tagged
from .. import templates


def parse_score(text: str, strict: bool = True) -> float:
    """Parse an inconsistency score.

    Strict mode (the default for evaluation runs) rejects non-numeric and
    out-of-range values; lenient mode clamps to [0, 1] with a warning.
    Silent clamping would bias threshold sweeps, so strict is the default.
    """
    try:
        score = float(text.strip())
    except ValueError as exc:
        raise VerificationError(f"non-numeric inconsistency score {text!r}") from exc
    if 0.0 <= score <= 1.0:
        return score
    if strict:
        raise VerificationError(f"inconsistency score {score} outside [0, 1]")
    clamped = min(1.0, max(0.0, score))
    warnings.warn(f"clamped out-of-range score {score} to {clamped}", stacklevel=2)
    return clamped


def verify(
    fact: AtomicFact,
    evidence: list[EvidenceItem],
    clarifications: Iterable[str],
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
    strict: bool = True,
) -> float:
    """Inconsistency score in [0, 1] for the fact given all evidence.

    The rendered prompt carries the fact, its source context, every
    clarification, and every evidence text in list (rank) order.
    """
    if not evidence:
        raise VerificationError(f"verification of fact {fact.fact_id} requires evidence")
    if not fact.context_text:
        raise VerificationError(f"fact {fact.fact_id} has no context")
    clarification_list = list(clarifications)
    response = call_template(
        provider,
        templates.VERIFIER,
        {
            "claim": fact.claim_text,
            "title": fact.context_title,
            "context": fact.context_text,
            "clarifications": templates.format_clarifications(clarification_list),
            "documents": templates.format_documents((e.doc_title, e.text) for e in evidence),
        },
        decoding=decoding,
        context={
            "claim_text": fact.claim_text,
            "evidence_texts": [e.text for e in evidence],
            "fact_id": fact.fact_id,
        },
        run_log=run_log,
    )
    try:
        region = extract_tagged(response, "inconsistency_score")
    except TagParseError as exc:
        raise VerificationError(
            f"verifier response for fact {fact.fact_id} has no <inconsistency_score> region"
        ) from exc
    return parse_score(region, strict=strict)
