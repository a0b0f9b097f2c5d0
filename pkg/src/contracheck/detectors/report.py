"""Two-sided report generation for human reviewers."""

from __future__ import annotations

from ..errors import ContracheckError, VerificationError
from ..facts import AtomicFact
from ..llm import DecodingConfig, LlmProvider, RunLog, call_template
from .. import templates
from .types import DetectionResult, TwoSidedReport


def generate_report(
    fact: AtomicFact,
    result: DetectionResult,
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> TwoSidedReport:
    """One argument that the fact is inconsistent, one that it is consistent,
    packaged with the agent trace (empty for baseline systems).

    If one side's call fails, the other side still ships and the failed side
    is marked unavailable.
    """
    if not result.evidence:
        raise VerificationError(f"report for fact {fact.fact_id} requires evidence")
    variables = {
        "claim": fact.claim_text,
        "title": fact.context_title,
        "context": fact.context_text,
        "clarifications": templates.format_clarifications(result.clarifications),
        "documents": templates.format_documents(
            (e.doc_title, e.text) for e in result.evidence
        ),
    }
    context = {"claim_text": fact.claim_text, "fact_id": fact.fact_id}
    sides: dict[str, str | None] = {}
    unavailable: list[str] = []
    for side, template in (
        ("pro_inconsistent", templates.REPORT_INCONSISTENT),
        ("pro_consistent", templates.REPORT_CONSISTENT),
    ):
        try:
            sides[side] = call_template(
                provider, template, variables, decoding=decoding, context=context, run_log=run_log
            )
        except ContracheckError:
            sides[side] = None
            unavailable.append(side)
    return TwoSidedReport(
        pro_inconsistent=sides["pro_inconsistent"],
        pro_consistent=sides["pro_consistent"],
        trace=result.trace,
        unavailable=tuple(unavailable),
    )
