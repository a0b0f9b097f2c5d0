"""Review service: page analysis jobs, the review queue, and verdicts.

The detection core stays import-only here; this module owns job orchestration
(a bounded worker pool) and the HTTP surface.
"""

from __future__ import annotations

import hashlib
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, Header, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

import json

from ..config import RunConfig
from ..corpus import Block, CorpusSnapshot, compute_block_id, filter_block
from ..detectors import (
    SYSTEMS,
    DetectionResult,
    TwoSidedReport,
    generate_report,
    run_agent,
    run_nli_pipeline,
    run_retrieve_and_verify,
)
from ..embedding import VectorIndex
from ..errors import ContracheckError
from ..facts import AtomicFact, extract_facts
from ..llm import LlmProvider, RunLog
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    ErrorBody,
    ItemDetail,
    ItemSummary,
    JobResponse,
    QueueResponse,
    VerdictRequest,
)
from .store import (
    HumanVerdict,
    ItemNotFoundError,
    ReviewItem,
    ReviewStore,
    VerdictConflictError,
    locate_highlight,
)


@dataclass
class AnalysisJob:
    job_id: str
    key: str
    page_title: str
    system: str
    score_floor: float
    status: str = "pending"
    error: dict | None = None
    item_ids: list[str] = field(default_factory=list)


def _page_blocks(page_title: str, page_text: str, min_chars: int, max_chars: int) -> list[Block]:
    """Newline-delimited page paragraphs that pass the length filter, as
    ephemeral blocks (not inserted into the corpus)."""
    blocks = []
    for ordinal, line in enumerate(page_text.splitlines()):
        text = line.strip()
        if not text or not filter_block(text, min_chars, max_chars):
            continue
        blocks.append(
            Block(
                block_id=compute_block_id(page_title, ("live",), ordinal),
                doc_title=page_title,
                section_path=(),
                kind="passage",
                text=text,
            )
        )
    return blocks


class ReviewService:
    """Wires the detection core to the review store and job pool."""

    def __init__(
        self,
        snapshot: CorpusSnapshot,
        index: VectorIndex,
        provider: LlmProvider,
        config: RunConfig | None = None,
        store: ReviewStore | None = None,
        max_workers: int = 2,
        eager: bool = False,
        page_min_chars: int = 100,
        page_max_chars: int = 320,
    ):
        self.snapshot = snapshot
        self.index = index
        self.provider = provider
        self.config = config or RunConfig()
        self.store = store if store is not None else ReviewStore()
        self.run_log = RunLog()
        self.eager = eager
        self.page_min_chars = page_min_chars
        self.page_max_chars = page_max_chars
        self._jobs: dict[str, AnalysisJob] = {}
        self._lock = threading.Lock()
        self._executor = ThreadPoolExecutor(max_workers=max_workers)

    def analyze_page(
        self,
        page_title: str,
        page_text: str,
        system: str = "retrieve_verify",
        score_floor: float = 0.5,
    ) -> str:
        """Queue background analysis of a page; returns a job id.

        Submitting a page already in flight (same title, text, system, floor)
        returns the existing job id instead of starting a second run.
        """
        if not page_text.strip():
            raise ContracheckError("page text must be non-empty", stage="analysis")
        if not 0.0 <= score_floor <= 1.0:
            raise ContracheckError(f"score_floor {score_floor} outside [0, 1]", stage="analysis")
        if system not in SYSTEMS:
            raise ContracheckError(f"unknown system {system!r}", stage="analysis")
        key = hashlib.sha256(
            f"{page_title}\x1f{page_text}\x1f{system}\x1f{score_floor}".encode()
        ).hexdigest()[:16]
        with self._lock:
            for job in self._jobs.values():
                if job.key == key and job.status in ("pending", "running"):
                    return job.job_id
            job = AnalysisJob(
                job_id=f"job-{key}-{len(self._jobs):03d}",
                key=key,
                page_title=page_title,
                system=system,
                score_floor=score_floor,
            )
            self._jobs[job.job_id] = job
        if self.eager:
            self._run_job(job, page_title, page_text)
        else:
            self._executor.submit(self._run_job, job, page_title, page_text)
        return job.job_id

    def job(self, job_id: str) -> AnalysisJob:
        job = self._jobs.get(job_id)
        if job is None:
            raise ItemNotFoundError(f"no analysis job {job_id}")
        return job

    def _detect(self, fact: AtomicFact, system: str) -> DetectionResult:
        cfg = self.config
        if system == "agent":
            return run_agent(
                fact, self.snapshot, self.index, self.provider,
                budget=cfg.budget, k_per_search=cfg.k_search,
                use_rerank=cfg.rerank, run_log=self.run_log,
            )
        if system == "retrieve_verify":
            return run_retrieve_and_verify(
                fact, self.index, self.provider,
                k=cfg.k_baseline, use_rerank=cfg.rerank, run_log=self.run_log,
            )
        return run_nli_pipeline(
            fact, self.index, self.provider,
            k=cfg.k_baseline, count_threshold=cfg.count_threshold, run_log=self.run_log,
        )

    def _run_job(self, job: AnalysisJob, page_title: str, page_text: str) -> None:
        job.status = "running"
        stage = "page-splitting"
        try:
            blocks = _page_blocks(page_title, page_text, self.page_min_chars, self.page_max_chars)
            for block in blocks:
                stage = "fact-extraction"
                facts = extract_facts(block, self.provider, run_log=self.run_log)
                for fact in facts:
                    stage = "detection"
                    result = self._detect(fact, job.system)
                    if result.score < job.score_floor or not result.evidence:
                        continue
                    stage = "report"
                    report = generate_report(fact, result, self.provider, run_log=self.run_log)
                    highlight = locate_highlight(page_text, fact.context_text)
                    item = ReviewItem(
                        item_id=f"item-{hashlib.sha256((job.job_id + fact.fact_id).encode()).hexdigest()[:12]}",
                        fact=fact,
                        result=result,
                        report=report,
                        highlight=highlight,
                        page_title=page_title,
                        page_text=page_text,
                        job_id=job.job_id,
                    )
                    stage = "store"
                    self.store.add_item(item)
                    job.item_ids.append(item.item_id)
            job.status = "completed"
        except ContracheckError as exc:
            job.status = "failed"
            job.error = {
                "code": type(exc).__name__,
                "stage": exc.stage or stage,
                "message": str(exc),
            }
        except Exception as exc:  # keep partial items, surface the cause
            job.status = "failed"
            job.error = {"code": type(exc).__name__, "stage": stage, "message": str(exc)}


def create_app(service: ReviewService) -> FastAPI:
    app = FastAPI(title="contracheck review service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ItemNotFoundError)
    async def not_found(request: Request, exc: ItemNotFoundError):
        return JSONResponse(
            status_code=404,
            content=ErrorBody(code="not_found", stage=exc.stage, message=str(exc)).model_dump(),
        )

    @app.exception_handler(VerdictConflictError)
    async def conflict(request: Request, exc: VerdictConflictError):
        return JSONResponse(
            status_code=409,
            content=ErrorBody(code="conflict", stage=exc.stage, message=str(exc)).model_dump(),
        )

    @app.exception_handler(ContracheckError)
    async def toolkit_error(request: Request, exc: ContracheckError):
        return JSONResponse(
            status_code=400,
            content=ErrorBody(
                code=type(exc).__name__, stage=exc.stage, message=str(exc)
            ).model_dump(),
        )

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(request: AnalyzeRequest) -> AnalyzeResponse:
        job_id = service.analyze_page(
            request.title, request.text, request.system, request.score_floor
        )
        return AnalyzeResponse(job_id=job_id)

    @app.get("/jobs/{job_id}", response_model=JobResponse)
    def job_status(job_id: str) -> JobResponse:
        job = service.job(job_id)
        return JobResponse(
            job_id=job.job_id,
            status=job.status,
            error=ErrorBody(**job.error) if job.error else None,
            item_ids=list(job.item_ids),
        )

    @app.get("/queue", response_model=QueueResponse)
    def queue(min_score: float = 0.0, status: str | None = None) -> QueueResponse:
        items = service.store.queue(min_score=min_score, status=status)
        return QueueResponse(items=[ItemSummary.from_item(i) for i in items])

    @app.get("/items/{item_id}", response_model=ItemDetail)
    def item_detail(item_id: str) -> ItemDetail:
        return ItemDetail.from_item(service.store.get(item_id))

    @app.post("/verdicts", response_model=ItemSummary)
    def submit_verdict(
        request: VerdictRequest,
        x_reviewer_id: str = Header(default="anonymous"),
    ) -> ItemSummary:
        verdict = HumanVerdict(
            item_id=request.item_id,
            decision=request.decision,
            reviewer_id=x_reviewer_id,
            note=request.note,
        )
        item = service.store.submit_verdict(verdict)
        return ItemSummary.from_item(item)

    @app.get("/export/dataset")
    def export_dataset(split: str = "validation") -> PlainTextResponse:
        records = service.store.export_dataset(split=split)
        body = "\n".join(
            json.dumps(r.to_record(), ensure_ascii=False, sort_keys=True) for r in records
        )
        return PlainTextResponse(body + ("\n" if body else ""), media_type="application/x-ndjson")

    return app
