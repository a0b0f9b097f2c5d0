"""Shared detector domain types and result serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from ..embedding import EvidenceItem
from ..errors import VerificationError
from ..templates import AGENT_ACTIONS

SYSTEMS = ("agent", "retrieve_verify", "nli_pipeline")


class NliLabel(str, Enum):
    SUPPORTS = "SUPPORTS"
    REFUTES = "REFUTES"
    NOT_ENOUGH_INFO = "NOT_ENOUGH_INFO"


@dataclass(frozen=True)
class AgentAction:
    """One controller decision; kind matches the controller prompt's action set."""

    kind: str
    argument: str

    def __post_init__(self):
        if self.kind not in AGENT_ACTIONS:
            raise ValueError(f"unknown agent action kind {self.kind!r}")


@dataclass(frozen=True)
class AgentStep:
    thought: str
    action: AgentAction
    observation: str

    def to_record(self) -> dict:
        return {
            "thought": self.thought,
            "action": {"kind": self.action.kind, "argument": self.action.argument},
            "observation": self.observation,
        }

    @classmethod
    def from_record(cls, record: dict) -> "AgentStep":
        return cls(
            thought=record["thought"],
            action=AgentAction(**record["action"]),
            observation=record["observation"],
        )


@dataclass(frozen=True)
class AgentTrace:
    steps: tuple[AgentStep, ...]
    budget: int

    def __post_init__(self):
        if len(self.steps) > self.budget:
            raise ValueError(f"trace has {len(self.steps)} steps, over budget {self.budget}")

    def to_record(self) -> dict:
        return {"steps": [s.to_record() for s in self.steps], "budget": self.budget}

    @classmethod
    def from_record(cls, record: dict) -> "AgentTrace":
        return cls(
            steps=tuple(AgentStep.from_record(s) for s in record["steps"]),
            budget=record["budget"],
        )


@dataclass
class DetectionResult:
    """Outcome of one detector run over one fact."""

    fact_id: str
    system: str
    score: float
    evidence: list[EvidenceItem] = field(default_factory=list)
    clarifications: list[str] = field(default_factory=list)
    trace: AgentTrace | None = None
    refute_count: int | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise VerificationError(f"unknown detection system {self.system!r}")
        if not 0.0 <= self.score <= 1.0:
            raise VerificationError(f"score {self.score} outside [0, 1]")

    def to_record(self) -> dict:
        return {
            "fact_id": self.fact_id,
            "system": self.system,
            "score": self.score,
            "evidence": [e.to_record() for e in self.evidence],
            "clarifications": list(self.clarifications),
            "trace": self.trace.to_record() if self.trace else None,
            "refute_count": self.refute_count,
            "meta": self.meta,
        }

    @classmethod
    def from_record(cls, record: dict) -> "DetectionResult":
        return cls(
            fact_id=record["fact_id"],
            system=record["system"],
            score=record["score"],
            evidence=[EvidenceItem(**e) for e in record["evidence"]],
            clarifications=list(record["clarifications"]),
            trace=AgentTrace.from_record(record["trace"]) if record.get("trace") else None,
            refute_count=record.get("refute_count"),
            meta=record.get("meta", {}),
        )


@dataclass(frozen=True)
class TwoSidedReport:
    """Paired arguments for and against a fact's inconsistency, plus the trace.

    A side that could not be generated is None and named in `unavailable`.
    """

    pro_inconsistent: str | None
    pro_consistent: str | None
    trace: AgentTrace | None = None
    unavailable: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "pro_inconsistent": self.pro_inconsistent,
            "pro_consistent": self.pro_consistent,
            "trace": self.trace.to_record() if self.trace else None,
            "unavailable": list(self.unavailable),
        }

    @classmethod
    def from_record(cls, record: dict) -> "TwoSidedReport":
        return cls(
            pro_inconsistent=record.get("pro_inconsistent"),
            pro_consistent=record.get("pro_consistent"),
            trace=AgentTrace.from_record(record["trace"]) if record.get("trace") else None,
            unavailable=tuple(record.get("unavailable", ())),
        )


def save_results(results: Iterable[DetectionResult], path: str | Path) -> None:
    """Line-delimited results, ordered by fact_id for reproducible files."""
    ordered = sorted(results, key=lambda r: r.fact_id)
    with open(path, "w", encoding="utf-8") as fh:
        for result in ordered:
            fh.write(json.dumps(result.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def load_results(path: str | Path) -> list[DetectionResult]:
    with open(path, encoding="utf-8") as fh:
        return [DetectionResult.from_record(json.loads(line)) for line in fh if line.strip()]
