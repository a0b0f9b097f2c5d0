"""Pydantic request/response models for the review API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .store import ReviewItem


class AnalyzeRequest(BaseModel):
    title: str = Field(min_length=1)
    text: str = Field(min_length=1)
    system: Literal["agent", "retrieve_verify", "nli_pipeline"] = "retrieve_verify"
    score_floor: float = Field(default=0.5, ge=0.0, le=1.0)


class AnalyzeResponse(BaseModel):
    job_id: str


class ErrorBody(BaseModel):
    code: str
    stage: Optional[str] = None
    message: str


class JobResponse(BaseModel):
    job_id: str
    status: Literal["pending", "running", "completed", "failed"]
    error: Optional[ErrorBody] = None
    item_ids: list[str] = []


class EvidenceModel(BaseModel):
    block_id: str
    similarity: float
    rank: int
    rerank_rank: Optional[int] = None
    doc_title: str = ""
    text: str = ""


class ActionModel(BaseModel):
    kind: str
    argument: str


class TraceStepModel(BaseModel):
    thought: str
    action: ActionModel
    observation: str


class TraceModel(BaseModel):
    steps: list[TraceStepModel]
    budget: int


class ResultModel(BaseModel):
    fact_id: str
    system: str
    score: float
    evidence: list[EvidenceModel] = []
    clarifications: list[str] = []
    trace: Optional[TraceModel] = None
    refute_count: Optional[int] = None
    meta: dict = {}


class ReportModel(BaseModel):
    pro_inconsistent: Optional[str] = None
    pro_consistent: Optional[str] = None
    trace: Optional[TraceModel] = None
    unavailable: list[str] = []


class FactModel(BaseModel):
    fact_id: str
    claim_text: str
    source_block_id: str
    source_doc_title: str
    context_title: str
    context_text: str
    faithful: Optional[bool] = None


class ItemSummary(BaseModel):
    item_id: str
    claim_text: str
    score: float
    status: Literal["pending", "accepted", "rejected"]
    page_title: str = ""

    @classmethod
    def from_item(cls, item: ReviewItem) -> "ItemSummary":
        return cls(
            item_id=item.item_id,
            claim_text=item.fact.claim_text,
            score=item.result.score,
            status=item.status,
            page_title=item.page_title,
        )


class ItemDetail(BaseModel):
    item_id: str
    status: Literal["pending", "accepted", "rejected"]
    page_title: str
    page_text: str
    highlight: Optional[tuple[int, int]] = None
    fact: FactModel
    result: ResultModel
    report: ReportModel

    @classmethod
    def from_item(cls, item: ReviewItem) -> "ItemDetail":
        return cls(
            item_id=item.item_id,
            status=item.status,
            page_title=item.page_title,
            page_text=item.page_text,
            highlight=item.highlight,
            fact=FactModel(**item.fact.to_record()),
            result=ResultModel(**item.result.to_record()),
            report=ReportModel(**item.report.to_record()),
        )


class QueueResponse(BaseModel):
    items: list[ItemSummary]


class VerdictRequest(BaseModel):
    item_id: str
    decision: Literal["accept", "reject"]
    note: Optional[str] = None
