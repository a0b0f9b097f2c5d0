"""Single-pass detectors: retrieve-and-verify, the per-passage NLI pipeline,
and the permissive weak filter used to enrich inconsistency candidates."""

from __future__ import annotations

from ..embedding import VectorIndex, rerank, search
from ..errors import ClassificationError, ContracheckError, TagParseError
from ..facts import AtomicFact
from ..llm import DecodingConfig, LlmProvider, RunLog, call_template, extract_tagged
from .. import templates
from .types import DetectionResult, NliLabel
from .verify import verify

DEFAULT_K_BASELINE = 20


def run_retrieve_and_verify(
    fact: AtomicFact,
    index: VectorIndex,
    provider: LlmProvider,
    k: int = DEFAULT_K_BASELINE,
    use_rerank: bool = True,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
    strict: bool = True,
) -> DetectionResult:
    """Retrieve once with the claim as query (source article excluded),
    optionally rerank, then score with a single verification call.

    With zero retrievable evidence the fact cannot be contradicted by
    anything examined, so the score is 0.0 with a no-evidence flag.
    """
    meta: dict = {}
    items = search(index, fact.claim_text, k, exclude_doc_title=fact.source_doc_title)
    if not items:
        meta["no_evidence"] = True
        return DetectionResult(
            fact_id=fact.fact_id, system="retrieve_verify", score=0.0, meta=meta
        )
    if use_rerank:
        outcome = rerank(fact.claim_text, items, provider, decoding=decoding, run_log=run_log)
        items = outcome.items
        if outcome.degraded:
            meta["degraded"] = True
    score = verify(fact, items, [], provider, decoding=decoding, run_log=run_log, strict=strict)
    return DetectionResult(
        fact_id=fact.fact_id, system="retrieve_verify", score=score, evidence=items, meta=meta
    )


def nli_classify(
    fact: AtomicFact,
    passage_text: str,
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> NliLabel:
    """Three-way classification of one evidence passage against the claim."""
    if not passage_text or not passage_text.strip():
        raise ClassificationError(f"empty passage for fact {fact.fact_id}")
    response = call_template(
        provider,
        templates.NLI_CLASSIFY,
        {"claim": fact.claim_text, "passage": passage_text},
        decoding=decoding,
        context={"claim_text": fact.claim_text, "passage_text": passage_text},
        run_log=run_log,
    )
    try:
        raw = extract_tagged(response, "label").upper().replace(" ", "_")
    except TagParseError as exc:
        raise ClassificationError(f"no <label> region in NLI response: {response!r}") from exc
    try:
        return NliLabel(raw)
    except ValueError as exc:
        raise ClassificationError(f"unknown NLI label {raw!r}") from exc


def run_nli_pipeline(
    fact: AtomicFact,
    index: VectorIndex,
    provider: LlmProvider,
    k: int = DEFAULT_K_BASELINE,
    count_threshold: int = 1,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> DetectionResult:
    """Classify each retrieved passage independently; a fact is inconsistent
    iff at least count_threshold passages come back REFUTES.

    score = refute_count / k so threshold sweeps can trace a ROC curve.
    Per-passage classification errors skip that passage; a run where every
    passage fails is a pipeline error.
    """
    if count_threshold < 1:
        raise ClassificationError(f"count_threshold must be >= 1, got {count_threshold}")
    meta: dict = {"count_threshold": count_threshold, "k": k}
    items = search(index, fact.claim_text, k, exclude_doc_title=fact.source_doc_title)
    if not items:
        meta["no_evidence"] = True
        meta["decision"] = "consistent"
        return DetectionResult(
            fact_id=fact.fact_id, system="nli_pipeline", score=0.0, refute_count=0, meta=meta
        )
    refute_count = 0
    skipped: list[str] = []
    for item in items:
        try:
            label = nli_classify(fact, item.text, provider, decoding=decoding, run_log=run_log)
        except ClassificationError as exc:
            skipped.append(f"{item.block_id}: {exc}")
            continue
        if label is NliLabel.REFUTES:
            refute_count += 1
    if skipped and len(skipped) == len(items):
        raise ClassificationError(
            f"all {len(items)} passages failed classification for fact {fact.fact_id}"
        )
    if skipped:
        meta["skipped"] = skipped
    meta["decision"] = "inconsistent" if refute_count >= count_threshold else "consistent"
    return DetectionResult(
        fact_id=fact.fact_id,
        system="nli_pipeline",
        score=refute_count / k,
        evidence=items,
        refute_count=refute_count,
        meta=meta,
    )


def weak_filter(
    fact: AtomicFact,
    index: VectorIndex,
    provider: LlmProvider,
    k: int = DEFAULT_K_BASELINE,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> bool:
    """Permissive candidate screen: one retrieval, one binary decision.

    True keeps the fact as an inconsistency candidate. Facts with no
    retrievable related content are filtered out immediately.
    """
    items = search(index, fact.claim_text, k, exclude_doc_title=fact.source_doc_title)
    if not items:
        return False
    response = call_template(
        provider,
        templates.WEAK_FILTER,
        {
            "claim": fact.claim_text,
            "title": fact.context_title,
            "context": fact.context_text,
            "documents": templates.format_documents((e.doc_title, e.text) for e in items),
        },
        decoding=decoding,
        context={"claim_text": fact.claim_text, "evidence_texts": [e.text for e in items]},
        run_log=run_log,
    )
    try:
        decision = extract_tagged(response, "decision").strip().lower()
    except TagParseError as exc:
        raise ClassificationError(f"no <decision> region in filter response") from exc
    if decision not in ("yes", "no"):
        raise ClassificationError(f"filter decision must be yes/no, got {decision!r}")
    return decision == "yes"
