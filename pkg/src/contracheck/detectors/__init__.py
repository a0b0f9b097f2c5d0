"""Corpus-level inconsistency detectors: an agentic loop, retrieve-and-verify,
and a per-passage NLI pipeline, plus the weak candidate filter and two-sided
reviewer reports."""

from .agent import (
    DEFAULT_BUDGET,
    DEFAULT_K_PER_SEARCH,
    parse_controller_action,
    run_agent,
    tool_clarify,
    tool_explain,
)
from .baselines import (
    DEFAULT_K_BASELINE,
    nli_classify,
    run_nli_pipeline,
    run_retrieve_and_verify,
    weak_filter,
)
from .report import generate_report
from .types import (
    SYSTEMS,
    AgentAction,
    AgentStep,
    AgentTrace,
    DetectionResult,
    NliLabel,
    TwoSidedReport,
    load_results,
    save_results,
)
from .verify import parse_score, verify

__all__ = [
    "AgentAction",
    "AgentStep",
    "AgentTrace",
    "DetectionResult",
    "NliLabel",
    "TwoSidedReport",
    "SYSTEMS",
    "DEFAULT_BUDGET",
    "DEFAULT_K_BASELINE",
    "DEFAULT_K_PER_SEARCH",
    "generate_report",
    "load_results",
    "nli_classify",
    "parse_controller_action",
    "parse_score",
    "run_agent",
    "run_nli_pipeline",
    "run_retrieve_and_verify",
    "save_results",
    "tool_clarify",
    "tool_explain",
    "verify",
    "weak_filter",
]
