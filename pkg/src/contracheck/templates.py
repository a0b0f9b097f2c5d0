"""Versioned prompt template assets.

Every provider call in the toolkit goes through one of these templates. The
`# input` / `# output` markers delimit few-shot examples. Templates whose
notes say "format defined by this toolkit" have output contracts invented
here (rerank, reports, NLI, weak filter, faithfulness); the rest follow the
standard detection prompt set the pipelines were designed around.
"""

from __future__ import annotations

from typing import Iterable

from .llm import PromptTemplate

NLI_LABELS = ("SUPPORTS", "REFUTES", "NOT_ENOUGH_INFO")

AGENT_ACTIONS = ("explain", "clarify_entity", "search", "report_inconsistency")


def format_documents(items: Iterable[tuple[str, str]]) -> str:
    """Render (title, text) pairs as numbered evidence entries."""
    rendered = [
        f"[{i}] Title: {title}\n{text}" for i, (title, text) in enumerate(items, start=1)
    ]
    return "\n\n".join(rendered) if rendered else "(no documents)"


def format_clarifications(clarifications: Iterable[str]) -> str:
    rendered = [f"[{i}] {text}" for i, text in enumerate(clarifications, start=1)]
    return "\n\n".join(rendered) if rendered else "(none)"


FACT_EXTRACTION = PromptTemplate(
    name="fact_extraction",
    instruction=(
        "You split encyclopedia text into atomic facts. An atomic fact is a short,"
        " self-contained statement that conveys exactly one piece of information"
        " and can be checked on its own, without the surrounding paragraph.\n\n"
        "Rules:\n"
        "1. Cover everything the text states or directly implies; add nothing from"
        " outside knowledge.\n"
        "2. Resolve pronouns and vague references using the title so each fact"
        " stands alone.\n"
        "3. One fact per line. No numbering, no bullets.\n\n"
        "Put the final list between <facts> and </facts> tags, one fact per line."
    ),
    input_slot="Title: {title}\n\nText:\n{text}",
)

FAITHFULNESS = PromptTemplate(
    name="faithfulness",
    instruction=(
        "Decide whether a claim is fully supported by the source passage it was"
        " extracted from. Answer yes only when every part of the claim follows"
        " from the passage; answer no if anything is added, dropped, or distorted.\n\n"
        "Answer inside <faithful>yes</faithful> or <faithful>no</faithful> tags."
    ),
    input_slot=(
        "Claim: {claim}\n\nSource passage (Title: {title}):\n{context}"
    ),
    notes="format defined by this toolkit; automated proxy for a manual screen",
)

EXPLAIN = PromptTemplate(
    name="explain",
    instruction=(
        "You will be given a topic and the encyclopedia passage where it appears."
        " Write one self-contained paragraph of background for a reader who does"
        " not know the topic: define technical or domain-specific terms, and if"
        " the topic could refer to several distinct things, list every plausible"
        " meaning."
    ),
    input_slot="Topic: {topic}\nArticle: {title}\n{context}",
    few_shot=(
        (
            "Topic: the away goals rule\n"
            "Article: 1994 Cup Final > Second leg\n"
            "The second leg ended 2-2 on aggregate, and the visitors advanced on"
            " the away goals rule after scoring twice at their opponents' ground.",
            "The \"away goals rule\" is a tie-breaking method once common in"
            " two-legged knockout football ties. When the aggregate score is level"
            " after both legs, the team that scored more goals at the opposing"
            " team's stadium advances. Some competitions have since abolished the"
            " rule, so whether it applies depends on the season and tournament in"
            " question.",
        ),
        (
            "Topic: Margravine Wilhelmine\n"
            "Article: Wilhelmine of Bayreuth\n"
            "Wilhelmine (1709-1758) was a Prussian princess who became Margravine"
            " of Brandenburg-Bayreuth by marriage and oversaw the building of the"
            " opera house later listed as a heritage site.",
            "\"Margravine\" is the title of the wife of a margrave, a hereditary"
            " ruler of a border province in the Holy Roman Empire, roughly"
            " comparable to a marchioness. \"Margravine Wilhelmine\" most often"
            " refers to Wilhelmine of Prussia (1709-1758), Margravine of"
            " Brandenburg-Bayreuth, but several princesses named Wilhelmine held"
            " margravial or other German noble titles in the 18th century, so the"
            " name alone does not identify a unique person.",
        ),
    ),
)

CLARIFY = PromptTemplate(
    name="clarify",
    instruction=(
        "You will be given an entity description, the encyclopedia passage where"
        " the entity is mentioned, and search results that may cover it and other"
        " similarly named entities. Write one self-contained paragraph that"
        " disambiguates: enumerate the distinct entities that share or resemble"
        " the name, and state how they differ (dates, roles, places). Watch for"
        " people with the same name in different eras or professions, recurring"
        " events held in different years or cities, and organizations with"
        " similar names but different purposes."
    ),
    input_slot=(
        "Entity: {entity}\nOriginal article: {title}\n{context}\n\n"
        "Search results:\n{search_results}"
    ),
    few_shot=(
        (
            "Entity: the opera The Tempest\n"
            "Original article: List of operas > T\n"
            "The Tempest premiered to strong reviews and entered the regular"
            " repertory within a decade.\n\n"
            "Search results:\n"
            "[1] Title: The Tempest (Adès opera)\n"
            "The Tempest is a 2004 opera by Thomas Adès with a libretto after"
            " Shakespeare, first performed at the Royal Opera House.\n\n"
            "[2] Title: The Tempest (Hoiby opera)\n"
            "The Tempest is a 1986 opera by Lee Hoiby to a libretto by Mark"
            " Shulgasser, premiered in Des Moines.",
            "There are at least two operas titled \"The Tempest\", both after"
            " Shakespeare's play. 1. Thomas Adès's The Tempest (2004) premiered at"
            " the Royal Opera House in London. 2. Lee Hoiby's The Tempest (1986)"
            " premiered in Des Moines. They are distinct works by different"
            " composers nearly two decades apart, so statements about \"the opera"
            " The Tempest\" must be matched to the right composer and premiere"
            " year.",
        ),
    ),
)

NLI_CLASSIFY = PromptTemplate(
    name="nli_classify",
    instruction=(
        "Classify the relationship between a passage and a claim.\n\n"
        "- SUPPORTS: the passage entails the claim.\n"
        "- REFUTES: the passage states or directly implies the opposite of the"
        " claim.\n"
        "- NOT_ENOUGH_INFO: the passage neither supports nor refutes it.\n\n"
        "Answer with exactly one label inside <label></label> tags."
    ),
    input_slot="Claim: {claim}\n\nPassage:\n{passage}",
    salient_variables=("claim", "passage"),
    notes="format defined by this toolkit",
)

VERIFIER = PromptTemplate(
    name="verifier",
    instruction=(
        "Decide whether a claim extracted from an encyclopedia paragraph is"
        " contradicted by any of the documents below. A claim is inconsistent"
        " when at least one document conflicts with it; if no document conflicts"
        " — even if none explicitly supports the claim — the claim counts as"
        " consistent.\n\n"
        "Guidance:\n"
        "1. The claim's full meaning may depend on its source paragraph; read"
        " both.\n"
        "2. Ignore documents that are clearly about something else. Identically"
        " named entities are not automatically the same entity — use the"
        " clarifications to tell them apart. Clarifications resolve ambiguity"
        " only; they are not evidence for or against the claim.\n"
        "3. Acceptable rounding, translation variants of the same name, and"
        " statements about different time periods are not contradictions.\n"
        "4. Differences of belief, viewpoint, or evolving scholarly"
        " interpretation are not contradictions.\n\n"
        "Work through your analysis first, then give a single inconsistency"
        " score between 0 and 1, where 0 means fully consistent with every"
        " document, 1 means directly contradicted by at least one document, and"
        " values in between express partial or uncertain conflict.\n\n"
        "End with the score inside <inconsistency_score></inconsistency_score>"
        " tags, e.g. <inconsistency_score>0.8</inconsistency_score>."
    ),
    input_slot=(
        "<claim>\n"
        "Title: {title}\n"
        "{context}\n\n"
        "Focus on the part of this paragraph asserting: \"{claim}\"\n"
        "</claim>\n\n"
        "<clarifications>\n{clarifications}\n</clarifications>\n\n"
        "<documents>\n{documents}\n</documents>"
    ),
    salient_variables=("claim", "documents"),
)

CONTROLLER = PromptTemplate(
    name="controller",
    instruction=(
        "You are investigating whether a claim taken from one encyclopedia"
        " article is contradicted anywhere else in the same corpus. You may find"
        " pages that support the claim; keep looking anyway, because a"
        " contradiction elsewhere still counts. Work step by step: at each step,"
        " reason briefly about what you know so far, then take exactly one"
        " action:\n\n"
        "- explain(topic): get background on a term or concept you need to"
        " understand, e.g. the rules of a sport.\n"
        "- clarify_entity(description): get a report distinguishing entities"
        " with similar names, e.g. clarify_entity(\"WW III wrestling event\")"
        " lists the events sharing that name.\n"
        "- search(question): search the corpus, excluding the claim's own"
        " article.\n"
        "- report_inconsistency(evidence): if you are confident you found a"
        " contradiction, report it with one sentence describing the conflict; a"
        " reviewer will then verify it.\n\n"
        "Respond with your reasoning on a 'Thought:' line followed by exactly"
        " one 'Action:' line, e.g.\n"
        "Thought: I should check when the bridge opened.\n"
        "Action: search(When did the~ bridge open?)"
    ),
    input_slot=(
        "Claim to investigate:\n{claim}\n\n"
        "Context for the claim:\nTitle: {title}\n{context}\n\n"
        "Actions taken so far:\n{history}"
    ),
    salient_variables=("claim", "history"),
)

RERANK = PromptTemplate(
    name="rerank",
    instruction=(
        "Order the numbered passages below from most to least relevant to the"
        " query. Consider semantic relevance, not just word overlap. Answer with"
        " the passage numbers as a comma-separated list inside"
        " <ranking></ranking> tags, e.g. <ranking>2, 1, 3</ranking>. Use each"
        " number exactly once."
    ),
    input_slot="Query: {query}\n\nPassages:\n{passages}",
    salient_variables=("query", "passages"),
    notes="format defined by this toolkit",
)

WEAK_FILTER = PromptTemplate(
    name="weak_filter",
    instruction=(
        "You are a permissive first-pass screen for contradiction candidates."
        " Decide whether any of the documents below might conflict with the"
        " claim. Err on the side of yes: this filter only nominates candidates"
        " for closer review, so borderline conflicts should pass. Answer inside"
        " <decision>yes</decision> or <decision>no</decision> tags."
    ),
    input_slot=(
        "Claim: {claim}\n(Title: {title})\n{context}\n\n"
        "Documents:\n{documents}"
    ),
    salient_variables=("claim", "documents"),
    notes="format defined by this toolkit",
)

REPORT_INCONSISTENT = PromptTemplate(
    name="report_inconsistent",
    instruction=(
        "Write the strongest good-faith argument that the claim below is"
        " contradicted by the gathered evidence. Cite specific documents by"
        " their number, quote the conflicting statements, and explain the"
        " conflict plainly for a human reviewer. If the evidence is thin, argue"
        " the best available case and say where it is weakest."
    ),
    input_slot=(
        "Claim: {claim}\n(Title: {title})\n{context}\n\n"
        "Clarifications:\n{clarifications}\n\nEvidence:\n{documents}"
    ),
    salient_variables=("claim",),
    notes="format defined by this toolkit",
)

REPORT_CONSISTENT = PromptTemplate(
    name="report_consistent",
    instruction=(
        "Write the strongest good-faith argument that the claim below is NOT"
        " contradicted by the gathered evidence. Address the documents that"
        " look most like conflicts and explain why they are compatible with the"
        " claim (different entities, different time periods, rounding,"
        " translation variants). Write plainly for a human reviewer."
    ),
    input_slot=(
        "Claim: {claim}\n(Title: {title})\n{context}\n\n"
        "Clarifications:\n{clarifications}\n\nEvidence:\n{documents}"
    ),
    salient_variables=("claim",),
    notes="format defined by this toolkit",
)

TEMPLATES: dict[str, PromptTemplate] = {
    template.name: template
    for template in (
        FACT_EXTRACTION,
        FAITHFULNESS,
        EXPLAIN,
        CLARIFY,
        NLI_CLASSIFY,
        VERIFIER,
        CONTROLLER,
        RERANK,
        WEAK_FILTER,
        REPORT_INCONSISTENT,
        REPORT_CONSISTENT,
    )
}
