"""Tool-using detection agent.

A reason/act/observe loop driven by the controller prompt: the agent searches
the corpus (its source article excluded), asks for background explanations,
disambiguates entities, and may report a suspected contradiction. The loop
ends on report_inconsistency or budget exhaustion; either way a final
verification call over everything gathered produces the score, because the
controller's own confidence is not trusted as a score.
"""

from __future__ import annotations

import dataclasses
import re

from ..corpus import CorpusSnapshot
from ..embedding import EvidenceItem, VectorIndex, rerank, search
from ..errors import AgentError, ContracheckError, ToolError
from ..facts import AtomicFact
from ..llm import DecodingConfig, LlmProvider, RunLog, call_template
from .. import templates
from .types import AgentAction, AgentStep, AgentTrace, DetectionResult
from .verify import verify

DEFAULT_BUDGET = 10
DEFAULT_K_PER_SEARCH = 15
DEFAULT_K_CLARIFY = 10

_ACTION_RE = re.compile(
    r"^\s*(?:Action:\s*)?(explain|clarify_entity|search|report_inconsistency)\((.*)\)\s*$"
)

_FORMAT_REMINDER = (
    "Reminder: your previous reply contained no recognizable action. Reply with a"
    " 'Thought:' line followed by exactly one 'Action: name(argument)' line, where"
    " name is one of explain, clarify_entity, search, report_inconsistency."
)


def parse_controller_action(response: str) -> tuple[str, AgentAction] | None:
    """First line matching name(argument) wins; returns (thought, action) or
    None when no action line is recognizable."""
    lines = response.splitlines()
    for i, line in enumerate(lines):
        match = _ACTION_RE.match(line)
        if match:
            thought = "\n".join(lines[:i]).strip()
            thought = re.sub(r"^Thought:\s*", "", thought)
            return thought, AgentAction(kind=match.group(1), argument=match.group(2).strip())
    return None


def tool_explain(
    topic: str,
    fact_context: AtomicFact,
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> str:
    """Background paragraph on a topic, grounded in the fact's source block."""
    if not topic or not topic.strip():
        raise ToolError("explain requires a non-empty topic")
    try:
        return call_template(
            provider,
            templates.EXPLAIN,
            {
                "topic": topic,
                "title": fact_context.context_title,
                "context": fact_context.context_text,
            },
            decoding=decoding,
            context={"topic": topic, "fact_id": fact_context.fact_id},
            run_log=run_log,
        )
    except ContracheckError as exc:
        raise ToolError(f"explain failed for topic {topic!r}: {exc}") from exc


def tool_clarify(
    entity_description: str,
    fact_context: AtomicFact,
    index: VectorIndex,
    provider: LlmProvider,
    k: int = DEFAULT_K_CLARIFY,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> str:
    """Disambiguation report for similarly named entities.

    Retrieval here does NOT exclude the source article: telling lookalike
    entities apart may need the article's own neighborhood.
    """
    if not entity_description or not entity_description.strip():
        raise ToolError("clarify requires a non-empty entity description")
    items = search(index, entity_description, k)
    results = templates.format_documents((e.doc_title, e.text) for e in items)
    try:
        report = call_template(
            provider,
            templates.CLARIFY,
            {
                "entity": entity_description,
                "title": fact_context.context_title,
                "context": fact_context.context_text,
                "search_results": results,
            },
            decoding=decoding,
            context={"entity": entity_description, "fact_id": fact_context.fact_id},
            run_log=run_log,
        )
    except ContracheckError as exc:
        raise ToolError(f"clarify failed for {entity_description!r}: {exc}") from exc
    if not items:
        return (
            "No corpus evidence was retrieved for this entity; the report is based"
            " on the claim's context alone.\n\n" + report
        )
    return report


def _format_search_observation(items: list[EvidenceItem]) -> str:
    if not items:
        return "No results."
    return "\n".join(f"[{e.block_id}] Title: {e.doc_title}\n{e.text}" for e in items)


def _render_history(steps: list[AgentStep]) -> str:
    if not steps:
        return "(none yet)"
    rendered = []
    for i, step in enumerate(steps, start=1):
        rendered.append(
            f"Step {i}\nThought: {step.thought}\n"
            f"Action: {step.action.kind}({step.action.argument})\n"
            f"Observation: {step.observation}"
        )
    return "\n\n".join(rendered)


def run_agent(
    fact: AtomicFact,
    snapshot: CorpusSnapshot,
    index: VectorIndex,
    provider: LlmProvider,
    budget: int = DEFAULT_BUDGET,
    k_per_search: int = DEFAULT_K_PER_SEARCH,
    *,
    use_rerank: bool = True,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
    strict: bool = True,
) -> DetectionResult:
    """Run the detection loop for one fact and return a scored result.

    Controller output with no recognizable action gets one retry with a
    format reminder, then the run fails. Tool failures become observations
    so the loop keeps going. The trace never exceeds the step budget.
    """
    if budget < 1:
        raise AgentError(f"budget must be >= 1, got {budget}")
    steps: list[AgentStep] = []
    evidence: dict[str, EvidenceItem] = {}
    clarifications: list[str] = []
    meta: dict = {"evidence_touched": 0}
    reported = False

    while len(steps) < budget:
        history = _render_history(steps)
        controller_vars = {
            "claim": fact.claim_text,
            "title": fact.context_title,
            "context": fact.context_text,
            "history": history,
        }
        response = call_template(
            provider,
            templates.CONTROLLER,
            controller_vars,
            decoding=decoding,
            context={"claim_text": fact.claim_text, "step": len(steps) + 1},
            run_log=run_log,
        )
        parsed = parse_controller_action(response)
        if parsed is None:
            retry_vars = dict(controller_vars, history=f"{history}\n\n{_FORMAT_REMINDER}")
            response = call_template(
                provider,
                templates.CONTROLLER,
                retry_vars,
                decoding=decoding,
                context={"claim_text": fact.claim_text, "step": len(steps) + 1, "retry": True},
                run_log=run_log,
            )
            parsed = parse_controller_action(response)
            if parsed is None:
                raise AgentError(
                    f"controller produced no recognizable action for fact {fact.fact_id}"
                    f" after a format reminder; last response: {response!r}"
                )
        thought, action = parsed

        if action.kind == "search":
            try:
                items = search(
                    index, action.argument, k_per_search, exclude_doc_title=fact.source_doc_title
                )
                if items and use_rerank:
                    outcome = rerank(
                        action.argument, items, provider, decoding=decoding, run_log=run_log
                    )
                    items = outcome.items
                    if outcome.degraded:
                        meta["degraded"] = True
                meta["evidence_touched"] += len(items)
                for item in items:
                    if item.block_id not in evidence:
                        evidence[item.block_id] = dataclasses.replace(
                            item, rank=len(evidence) + 1, rerank_rank=None
                        )
                observation = _format_search_observation(items)
            except ContracheckError as exc:
                observation = f"tool failed: {exc}"
        elif action.kind == "explain":
            try:
                observation = tool_explain(
                    action.argument, fact, provider, decoding=decoding, run_log=run_log
                )
                clarifications.append(observation)
            except ContracheckError as exc:
                observation = f"tool failed: {exc}"
        elif action.kind == "clarify_entity":
            try:
                observation = tool_clarify(
                    action.argument, fact, index, provider, decoding=decoding, run_log=run_log
                )
                clarifications.append(observation)
            except ContracheckError as exc:
                observation = f"tool failed: {exc}"
        else:  # report_inconsistency
            observation = "Report noted. Verification will score the gathered evidence."
            reported = True

        steps.append(AgentStep(thought=thought, action=action, observation=observation))
        if reported:
            break

    meta["reported"] = reported
    evidence_list = list(evidence.values())
    if evidence_list:
        score = verify(
            fact,
            evidence_list,
            clarifications,
            provider,
            decoding=decoding,
            run_log=run_log,
            strict=strict,
        )
    else:
        score = 0.0
        meta["no_evidence"] = True
    return DetectionResult(
        fact_id=fact.fact_id,
        system="agent",
        score=score,
        evidence=evidence_list,
        clarifications=clarifications,
        trace=AgentTrace(steps=tuple(steps), budget=budget),
        meta=meta,
    )
