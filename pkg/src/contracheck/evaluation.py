"""Labeled datasets and detector metrics.

Positive class is "inconsistent" throughout: flagging for review is the use
case, so false positives cost reviewer effort and false negatives miss real
contradictions. AUROC uses the half-credit tie convention (score clustering
at the extremes makes ties common); decisions use a strictly-greater-than
threshold rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .errors import CoverageError, MetricError
from .facts import AtomicFact

if TYPE_CHECKING:
    from .detectors.types import DetectionResult

GOLD_LABELS = ("consistent", "inconsistent")
SPLITS = ("validation", "test")

POSITIVE_LABEL = "inconsistent"
NEGATIVE_LABEL = "consistent"

MAX_CONSISTENT_EVIDENCE = 40


@dataclass(frozen=True)
class LabeledFact:
    """A fact with its gold label, reviewed evidence, and split assignment."""

    fact: AtomicFact
    gold_label: str
    evidence_block_ids: tuple[str, ...] = ()
    inconsistency_type: str | None = None
    split: str = "test"

    def __post_init__(self):
        if self.gold_label not in GOLD_LABELS:
            raise MetricError(f"gold_label must be one of {GOLD_LABELS}, got {self.gold_label!r}")
        if self.split not in SPLITS:
            raise MetricError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.gold_label == POSITIVE_LABEL and not self.evidence_block_ids:
            raise MetricError(
                f"inconsistent fact {self.fact.fact_id} needs at least one evidence block id"
            )
        if self.gold_label == NEGATIVE_LABEL and len(self.evidence_block_ids) > MAX_CONSISTENT_EVIDENCE:
            raise MetricError(
                f"consistent fact {self.fact.fact_id} lists more than "
                f"{MAX_CONSISTENT_EVIDENCE} reviewed passages"
            )

    def to_record(self) -> dict:
        return {
            "fact": self.fact.to_record(),
            "gold_label": self.gold_label,
            "evidence_block_ids": list(self.evidence_block_ids),
            "inconsistency_type": self.inconsistency_type,
            "split": self.split,
        }

    @classmethod
    def from_record(cls, record: dict) -> "LabeledFact":
        return cls(
            fact=AtomicFact.from_record(record["fact"]),
            gold_label=record["gold_label"],
            evidence_block_ids=tuple(record.get("evidence_block_ids", ())),
            inconsistency_type=record.get("inconsistency_type"),
            split=record.get("split", "test"),
        )


def save_dataset(dataset: Iterable[LabeledFact], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in dataset:
            fh.write(json.dumps(item.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def load_dataset(path: str | Path) -> list[LabeledFact]:
    with open(path, encoding="utf-8") as fh:
        return [LabeledFact.from_record(json.loads(line)) for line in fh if line.strip()]


def score_to_decision(score: float, threshold: float) -> str:
    """Inconsistent iff score is strictly above the threshold."""
    if not 0.0 <= score <= 1.0:
        raise MetricError(f"score {score} outside [0, 1]")
    if not 0.0 <= threshold <= 1.0:
        raise MetricError(f"threshold {threshold} outside [0, 1]")
    return POSITIVE_LABEL if score > threshold else NEGATIVE_LABEL


def count_threshold_to_score_threshold(count_threshold: int, k: int) -> float:
    """Map an NLI refute-count rule onto the score = count/k scale such that
    score > threshold  iff  count >= count_threshold."""
    if count_threshold < 1 or k < 1:
        raise MetricError("count_threshold and k must both be >= 1")
    return (count_threshold - 0.5) / k


@dataclass(frozen=True)
class PrecisionRecallF1:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False


def compute_f1(predictions: Sequence[str], golds: Sequence[str]) -> PrecisionRecallF1:
    """Precision/recall/F1 with "inconsistent" as the positive class.

    Zero denominators yield 0.0 and set the degenerate flag.
    """
    if len(predictions) != len(golds):
        raise MetricError(f"length mismatch: {len(predictions)} predictions, {len(golds)} golds")
    if not golds:
        raise MetricError("cannot compute F1 over an empty dataset")
    tp = sum(1 for p, g in zip(predictions, golds) if p == POSITIVE_LABEL and g == POSITIVE_LABEL)
    fp = sum(1 for p, g in zip(predictions, golds) if p == POSITIVE_LABEL and g != POSITIVE_LABEL)
    fn = sum(1 for p, g in zip(predictions, golds) if p != POSITIVE_LABEL and g == POSITIVE_LABEL)
    degenerate = (tp + fp == 0) or (tp + fn == 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PrecisionRecallF1(precision=precision, recall=recall, f1=f1, degenerate=degenerate)


def _split_classes(scores: Sequence[float], golds: Sequence[str]) -> tuple[int, int]:
    if len(scores) != len(golds):
        raise MetricError(f"length mismatch: {len(scores)} scores, {len(golds)} golds")
    n_pos = sum(1 for g in golds if g == POSITIVE_LABEL)
    n_neg = len(golds) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUROC is undefined with a single class present")
    return n_pos, n_neg


def compute_auroc(scores: Sequence[float], golds: Sequence[str]) -> float:
    """Probability a random positive outranks a random negative, ties 0.5.

    Rank-sum (Mann-Whitney) formulation with average ranks for ties.
    """
    n_pos, n_neg = _split_classes(scores, golds)
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    ranks = [0.0] * len(scores)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        average = (i + j) / 2 + 1  # ranks are 1-based
        for position in range(i, j + 1):
            ranks[order[position]] = average
        i = j + 1
    rank_sum_pos = sum(r for r, g in zip(ranks, golds) if g == POSITIVE_LABEL)
    u_statistic = rank_sum_pos - n_pos * (n_pos + 1) / 2
    return u_statistic / (n_pos * n_neg)


@dataclass(frozen=True)
class RocPoint:
    fpr: float
    tpr: float
    threshold: float


def roc_curve(
    values: Sequence[float],
    golds: Sequence[str],
    mode: str = "score_threshold",
) -> list[RocPoint]:
    """ROC points sorted by FPR, always including (0,0) and (1,1).

    score_threshold mode sweeps the unique score values (a point's threshold t
    means: flag every item with score >= t). count_threshold mode sweeps
    integer thresholds 0..max_count+1 with the flag rule count >= t.
    """
    n_pos, n_neg = _split_classes(values, golds)
    points: list[RocPoint] = []
    if mode == "score_threshold":
        points.append(RocPoint(0.0, 0.0, math.inf))
        tp = fp = 0
        for value in sorted(set(values), reverse=True):
            tp += sum(1 for v, g in zip(values, golds) if v == value and g == POSITIVE_LABEL)
            fp += sum(1 for v, g in zip(values, golds) if v == value and g != POSITIVE_LABEL)
            points.append(RocPoint(fp / n_neg, tp / n_pos, value))
    elif mode == "count_threshold":
        if any(v != int(v) or v < 0 for v in values):
            raise MetricError("count_threshold mode requires non-negative integer counts")
        top = int(max(values)) + 1
        for t in range(top, -1, -1):
            tp = sum(1 for v, g in zip(values, golds) if v >= t and g == POSITIVE_LABEL)
            fp = sum(1 for v, g in zip(values, golds) if v >= t and g != POSITIVE_LABEL)
            points.append(RocPoint(fp / n_neg, tp / n_pos, float(t)))
    else:
        raise MetricError(f"unknown roc mode {mode!r}")
    return sorted(points, key=lambda p: (p.fpr, p.tpr, -p.threshold))


def trapezoid_auroc(points: Sequence[RocPoint]) -> float:
    """Area under a ROC polyline; cross-check for the rank-sum AUROC."""
    area = 0.0
    for left, right in zip(points, points[1:]):
        area += (right.fpr - left.fpr) * (right.tpr + left.tpr) / 2
    return area


def threshold_grid(scores: Sequence[float]) -> list[float]:
    """Candidate thresholds: midpoints between adjacent unique scores, plus
    the boundaries 0 and 1."""
    uniques = sorted(set(scores))
    grid = [0.0]
    grid.extend((a + b) / 2 for a, b in zip(uniques, uniques[1:]))
    grid.append(1.0)
    return sorted(set(grid))


def select_threshold(
    validation_scores: Sequence[float], validation_golds: Sequence[str]
) -> float:
    """Grid threshold maximizing validation F1; ties go to the smaller value."""
    _split_classes(validation_scores, validation_golds)
    best_threshold = None
    best_f1 = -1.0
    for candidate in threshold_grid(validation_scores):
        predictions = [score_to_decision(s, candidate) for s in validation_scores]
        f1 = compute_f1(predictions, validation_golds).f1
        if f1 > best_f1:
            best_f1 = f1
            best_threshold = candidate
    return best_threshold


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auroc: float
    threshold_used: float
    counts: Mapping[str, int]
    per_type_breakdown: Mapping[str, float] = field(default_factory=dict)
    degenerate: bool = False

    def to_record(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auroc": self.auroc,
            "threshold_used": self.threshold_used,
            "counts": dict(self.counts),
            "per_type_breakdown": dict(self.per_type_breakdown),
            "degenerate": self.degenerate,
            "reference_metrics": {k: dict(v) for k, v in REFERENCE_METRICS.items()},
        }

    def to_table(self) -> str:
        """Aligned-column text table, reference constants in the footer."""
        rows = [
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("auroc", self.auroc),
        ]
        lines = [f"{'metric':<12}{'value':>8}", "-" * 20]
        lines.extend(f"{name:<12}{value:>8.3f}" for name, value in rows)
        lines.append(f"{'threshold':<12}{self.threshold_used:>8.3f}")
        counts = self.counts
        lines.append(
            f"counts: tp={counts['tp']} fp={counts['fp']} tn={counts['tn']} fn={counts['fn']}"
        )
        if self.per_type_breakdown:
            lines.append("recall by inconsistency type:")
            for name, value in sorted(self.per_type_breakdown.items()):
                lines.append(f"  {name:<24}{value:>8.3f}")
        lines.append("")
        lines.append("reference (external full-scale runs; for context, never asserted):")
        for system, values in REFERENCE_METRICS.items():
            rendered = " ".join(f"{k}={v}" for k, v in values.items())
            lines.append(f"  {system:<28}{rendered}")
        return "\n".join(lines)


# External full-scale reference results, kept for report footers only.
REFERENCE_METRICS: Mapping[str, Mapping[str, float]] = {
    "agent/validation": {"accuracy": 76.5, "f1": 67.4, "auroc": 80.9},
    "retrieve_verify/validation": {"accuracy": 73.6, "f1": 65.2, "auroc": 78.5},
    "nli_pipeline/validation": {"accuracy": 74.0, "f1": 66.5, "auroc": 78.4},
    "agent/test": {"accuracy": 69.3, "f1": 69.6, "auroc": 75.1},
    "retrieve_verify/test": {"accuracy": 69.0, "f1": 69.7, "auroc": 73.0},
    "nli_pipeline/test": {"accuracy": 67.0, "f1": 70.2, "auroc": 72.2},
}


def evaluate(
    dataset: Sequence[LabeledFact],
    results: Sequence["DetectionResult"],
    threshold: float,
) -> MetricsReport:
    """Score detector results against gold labels.

    Results must cover every dataset fact exactly once; recall is broken out
    per inconsistency type where the dataset provides one.
    """
    if not dataset:
        raise MetricError("cannot evaluate an empty dataset")
    by_fact: dict[str, "DetectionResult"] = {}
    duplicates = []
    for result in results:
        if result.fact_id in by_fact:
            duplicates.append(result.fact_id)
        by_fact[result.fact_id] = result
    wanted = [item.fact.fact_id for item in dataset]
    missing = [fid for fid in wanted if fid not in by_fact]
    extra = sorted(set(by_fact) - set(wanted))
    if missing or duplicates or extra:
        raise CoverageError(
            f"results do not cover the dataset exactly once; missing={missing} "
            f"duplicate={sorted(set(duplicates))} extra={extra}"
        )
    scores = [by_fact[fid].score for fid in wanted]
    golds = [item.gold_label for item in dataset]
    predictions = [score_to_decision(s, threshold) for s in scores]
    tp = sum(1 for p, g in zip(predictions, golds) if p == POSITIVE_LABEL and g == POSITIVE_LABEL)
    fp = sum(1 for p, g in zip(predictions, golds) if p == POSITIVE_LABEL and g == NEGATIVE_LABEL)
    tn = sum(1 for p, g in zip(predictions, golds) if p == NEGATIVE_LABEL and g == NEGATIVE_LABEL)
    fn = sum(1 for p, g in zip(predictions, golds) if p == NEGATIVE_LABEL and g == POSITIVE_LABEL)
    prf = compute_f1(predictions, golds)
    auroc = compute_auroc(scores, golds)
    per_type: dict[str, list[bool]] = {}
    for item, prediction in zip(dataset, predictions):
        if item.gold_label == POSITIVE_LABEL and item.inconsistency_type:
            per_type.setdefault(item.inconsistency_type, []).append(
                prediction == POSITIVE_LABEL
            )
    breakdown = {t: sum(hits) / len(hits) for t, hits in per_type.items()}
    return MetricsReport(
        accuracy=(tp + tn) / len(dataset),
        precision=prf.precision,
        recall=prf.recall,
        f1=prf.f1,
        auroc=auroc,
        threshold_used=threshold,
        counts={"tp": tp, "fp": fp, "tn": tn, "fn": fn},
        per_type_breakdown=breakdown,
        degenerate=prf.degenerate,
    )
