"""Review store: flagged items, verdicts, and an append-only event log.

The log is the source of truth; replaying it on an empty store reconstructs
identical item statuses. Writes are serialized by a lock, reads are free.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..detectors.types import DetectionResult, TwoSidedReport
from ..errors import ContracheckError
from ..evaluation import MAX_CONSISTENT_EVIDENCE, LabeledFact
from ..facts import AtomicFact

ITEM_STATUSES = ("pending", "accepted", "rejected")
VERDICT_DECISIONS = ("accept", "reject")


class ItemNotFoundError(ContracheckError):
    stage = "review"


class VerdictConflictError(ContracheckError):
    stage = "review"


@dataclass
class ReviewItem:
    """One flagged claim awaiting (or past) human review."""

    item_id: str
    fact: AtomicFact
    result: DetectionResult
    report: TwoSidedReport
    highlight: tuple[int, int] | None
    status: str = "pending"
    page_title: str = ""
    page_text: str = ""
    job_id: str = ""

    def to_record(self) -> dict:
        return {
            "item_id": self.item_id,
            "fact": self.fact.to_record(),
            "result": self.result.to_record(),
            "report": self.report.to_record(),
            "highlight": list(self.highlight) if self.highlight else None,
            "status": self.status,
            "page_title": self.page_title,
            "page_text": self.page_text,
            "job_id": self.job_id,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ReviewItem":
        highlight = record.get("highlight")
        return cls(
            item_id=record["item_id"],
            fact=AtomicFact.from_record(record["fact"]),
            result=DetectionResult.from_record(record["result"]),
            report=TwoSidedReport.from_record(record["report"]),
            highlight=tuple(highlight) if highlight else None,
            status=record.get("status", "pending"),
            page_title=record.get("page_title", ""),
            page_text=record.get("page_text", ""),
            job_id=record.get("job_id", ""),
        )


@dataclass(frozen=True)
class HumanVerdict:
    item_id: str
    decision: str
    reviewer_id: str
    note: str | None = None
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.decision not in VERDICT_DECISIONS:
            raise VerdictConflictError(f"decision must be one of {VERDICT_DECISIONS}")

    def to_record(self) -> dict:
        return {
            "item_id": self.item_id,
            "decision": self.decision,
            "reviewer_id": self.reviewer_id,
            "note": self.note,
            "timestamp": self.timestamp,
        }


def locate_highlight(page_text: str, anchor: str) -> tuple[int, int] | None:
    """Character span of the anchor text inside the page.

    Exact substring search first, then a whitespace-collapsed match mapped
    back to original offsets. None when the anchor cannot be located.
    """
    position = page_text.find(anchor)
    if position >= 0:
        return (position, position + len(anchor))
    norm_chars: list[str] = []
    offset_map: list[int] = []
    previous_space = True
    for i, ch in enumerate(page_text):
        if ch.isspace():
            if previous_space:
                continue
            norm_chars.append(" ")
            offset_map.append(i)
            previous_space = True
        else:
            norm_chars.append(ch)
            offset_map.append(i)
            previous_space = False
    norm_page = "".join(norm_chars)
    norm_anchor = " ".join(anchor.split())
    position = norm_page.find(norm_anchor)
    if position < 0 or not norm_anchor:
        return None
    start = offset_map[position]
    end = offset_map[position + len(norm_anchor) - 1] + 1
    return (start, end)


class ReviewStore:
    """In-memory store with an optional durable append-only log."""

    def __init__(self, log_path: str | Path | None = None):
        self._items: dict[str, ReviewItem] = {}
        self._verdicts: list[HumanVerdict] = []
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path else None

    def _append_event(self, event: dict) -> None:
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")

    def add_item(self, item: ReviewItem) -> None:
        with self._lock:
            if item.item_id in self._items:
                raise VerdictConflictError(f"item {item.item_id} already exists")
            self._items[item.item_id] = item
            self._append_event({"event": "item_created", "item": item.to_record()})

    def get(self, item_id: str) -> ReviewItem:
        item = self._items.get(item_id)
        if item is None:
            raise ItemNotFoundError(f"no review item {item_id}")
        return item

    def __len__(self) -> int:
        return len(self._items)

    def queue(self, min_score: float = 0.0, status: str | None = None) -> list[ReviewItem]:
        """Items sorted by score descending then item_id: a stable total order
        that puts high-confidence candidates first."""
        if status is not None and status not in ITEM_STATUSES:
            raise ItemNotFoundError(f"unknown status filter {status!r}")
        items = [
            item
            for item in self._items.values()
            if item.result.score >= min_score and (status is None or item.status == status)
        ]
        return sorted(items, key=lambda i: (-i.result.score, i.item_id))

    def submit_verdict(self, verdict: HumanVerdict) -> ReviewItem:
        """Append the verdict and flip the item out of pending.

        Items accept exactly one terminal verdict; any further verdict (same
        reviewer or not) conflicts because the transition is pending-only.
        """
        with self._lock:
            item = self._items.get(verdict.item_id)
            if item is None:
                raise ItemNotFoundError(f"no review item {verdict.item_id}")
            if item.status != "pending":
                raise VerdictConflictError(
                    f"item {verdict.item_id} already has status {item.status}"
                )
            item.status = "accepted" if verdict.decision == "accept" else "rejected"
            self._verdicts.append(verdict)
            self._append_event({"event": "verdict", "verdict": verdict.to_record()})
            return item

    @property
    def verdicts(self) -> tuple[HumanVerdict, ...]:
        return tuple(self._verdicts)

    def export_dataset(self, split: str = "validation") -> list[LabeledFact]:
        """Reviewed items as labeled facts: accepted -> inconsistent with its
        evidence, rejected -> consistent with the reviewed passages."""
        exported = []
        for item in self.queue():
            if item.status == "pending":
                continue
            evidence_ids = tuple(e.block_id for e in item.result.evidence)
            if item.status == "accepted":
                exported.append(
                    LabeledFact(
                        fact=item.fact,
                        gold_label="inconsistent",
                        evidence_block_ids=evidence_ids,
                        split=split,
                    )
                )
            else:
                exported.append(
                    LabeledFact(
                        fact=item.fact,
                        gold_label="consistent",
                        evidence_block_ids=evidence_ids[:MAX_CONSISTENT_EVIDENCE],
                        split=split,
                    )
                )
        return exported

    @classmethod
    def replay(cls, log_path: str | Path) -> "ReviewStore":
        """Reconstruct a store (statuses included) from its event log."""
        store = cls()
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                if event["event"] == "item_created":
                    item = ReviewItem.from_record(event["item"])
                    item.status = "pending"
                    store._items[item.item_id] = item
                elif event["event"] == "verdict":
                    record = dict(event["verdict"])
                    verdict = HumanVerdict(**record)
                    item = store._items[verdict.item_id]
                    item.status = "accepted" if verdict.decision == "accept" else "rejected"
                    store._verdicts.append(verdict)
        return store
