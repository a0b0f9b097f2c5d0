"""Frozen corpus snapshots: ingest, validation, length filtering, and sampling.

A snapshot is a write-once collection of text blocks (passages, serialized
tables, infoboxes) keyed by deterministic block ids. Ingest is the single
writer; afterwards the snapshot is immutable and safe for concurrent readers.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import CorruptionError, IngestError, SampleError

BLOCK_KINDS = ("passage", "table", "infobox")

DEFAULT_MIN_CHARS = 100
DEFAULT_MAX_CHARS = 320

BLOCKS_FILENAME = "blocks.jsonl"
MANIFEST_FILENAME = "manifest.json"


@dataclass(frozen=True)
class Block:
    """One retrievable corpus unit with source identity."""

    block_id: str
    doc_title: str
    section_path: tuple[str, ...]
    kind: str
    text: str
    category: str | None = None

    @property
    def char_count(self) -> int:
        return len(self.text)

    @property
    def full_title(self) -> str:
        """Document title joined with its section path, e.g. "Doc > History"."""
        return " > ".join((self.doc_title,) + self.section_path)

    def to_record(self) -> dict:
        return {
            "block_id": self.block_id,
            "doc_title": self.doc_title,
            "section_path": list(self.section_path),
            "kind": self.kind,
            "text": self.text,
            "category": self.category,
        }


@dataclass(frozen=True)
class BlockFilter:
    """Length bounds for keeping a block at ingest, inclusive on both ends."""

    min_chars: int = DEFAULT_MIN_CHARS
    max_chars: int = DEFAULT_MAX_CHARS

    def __post_init__(self):
        if not (0 <= self.min_chars < self.max_chars):
            raise IngestError(
                f"invalid filter bounds ({self.min_chars}, {self.max_chars}): "
                "need 0 <= min < max"
            )


def filter_block(
    block_text: str,
    min_chars: int = DEFAULT_MIN_CHARS,
    max_chars: int = DEFAULT_MAX_CHARS,
) -> bool:
    """True iff the text length is within [min_chars, max_chars].

    Lengths are counted in Unicode code points, not bytes.
    """
    if min_chars >= max_chars:
        raise IngestError(f"min_chars {min_chars} must be < max_chars {max_chars}")
    return min_chars <= len(block_text) <= max_chars


@dataclass(frozen=True)
class CorpusSnapshot:
    """Immutable corpus: blocks by id plus a doc_title -> block_ids index."""

    snapshot_date: str
    blocks: Mapping[str, Block]
    title_index: Mapping[str, tuple[str, ...]]

    def __len__(self) -> int:
        return len(self.blocks)

    def block_ids(self) -> tuple[str, ...]:
        return tuple(self.blocks.keys())

    def get(self, block_id: str) -> Block | None:
        return self.blocks.get(block_id)

    def blocks_for_title(self, doc_title: str) -> tuple[Block, ...]:
        return tuple(self.blocks[i] for i in self.title_index.get(doc_title, ()))


def compute_block_id(doc_title: str, section_path: Iterable[str], ordinal: int) -> str:
    """Stable id from (doc_title, section_path, ordinal); re-ingest is id-stable."""
    key = "\x1f".join([doc_title, *section_path, str(ordinal)])
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def _parse_record(raw, line_no: int) -> dict:
    if isinstance(raw, dict):
        return raw
    if isinstance(raw, (str, bytes)):
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise IngestError(f"malformed record at line {line_no}: {exc}") from exc
        if not isinstance(record, dict):
            raise IngestError(f"malformed record at line {line_no}: not an object")
        return record
    raise IngestError(f"malformed record at line {line_no}: unsupported type {type(raw).__name__}")


def _validate_record(record: dict, line_no: int) -> tuple[str, tuple[str, ...], str, str, str | None]:
    for name in ("doc_title", "kind", "text"):
        if name not in record:
            raise IngestError(f"record at line {line_no} missing field '{name}'")
    doc_title = record["doc_title"]
    kind = record["kind"]
    text = record["text"]
    if not isinstance(doc_title, str) or not doc_title:
        raise IngestError(f"record at line {line_no}: doc_title must be a non-empty string")
    if kind not in BLOCK_KINDS:
        raise IngestError(f"record at line {line_no}: kind {kind!r} not in {BLOCK_KINDS}")
    if not isinstance(text, str) or not text:
        raise IngestError(f"record at line {line_no}: text is empty")
    section_path = tuple(record.get("section_path") or ())
    if not all(isinstance(s, str) for s in section_path):
        raise IngestError(f"record at line {line_no}: section_path must be a list of strings")
    category = record.get("category")
    if category is not None and not isinstance(category, str):
        raise IngestError(f"record at line {line_no}: category must be a string or null")
    return doc_title, section_path, kind, text, category


def ingest_snapshot(
    source: Iterable,
    block_filter: BlockFilter = BlockFilter(),
    *,
    snapshot_date: str,
) -> CorpusSnapshot:
    """Build a snapshot from a stream of block records.

    `source` yields JSON lines or dicts with fields doc_title, kind, text and
    optional section_path / category. Records are validated first (empty text
    is an error even if the filter would drop it), then kept iff they pass the
    length filter. Block ids are assigned from (doc_title, section_path,
    ordinal-among-kept-records), so serialize-then-reingest round-trips.
    """
    blocks: dict[str, Block] = {}
    title_index: dict[str, list[str]] = {}
    ordinals: dict[tuple, int] = {}
    for line_no, raw in enumerate(source, start=1):
        if isinstance(raw, str) and not raw.strip():
            continue
        record = _parse_record(raw, line_no)
        doc_title, section_path, kind, text, category = _validate_record(record, line_no)
        if not filter_block(text, block_filter.min_chars, block_filter.max_chars):
            continue
        group = (doc_title, section_path)
        ordinal = ordinals.get(group, 0)
        ordinals[group] = ordinal + 1
        block_id = compute_block_id(doc_title, section_path, ordinal)
        if block_id in blocks:
            raise CorruptionError(
                f"duplicate deterministic block id {block_id} at line {line_no}"
            )
        blocks[block_id] = Block(
            block_id=block_id,
            doc_title=doc_title,
            section_path=section_path,
            kind=kind,
            text=text,
            category=category,
        )
        title_index.setdefault(doc_title, []).append(block_id)
    return CorpusSnapshot(
        snapshot_date=snapshot_date,
        blocks=MappingProxyType(blocks),
        title_index=MappingProxyType({t: tuple(ids) for t, ids in title_index.items()}),
    )


def sample_blocks(
    snapshot: CorpusSnapshot,
    n: int,
    seed: int,
    stratify_by_category: bool = False,
) -> list[Block]:
    """Sample n blocks without replacement, deterministically for a fixed seed.

    With stratification, per-category counts follow proportional allocation
    with largest-remainder rounding, so each category's share deviates from
    the population share by less than one block.
    """
    population = list(snapshot.blocks.values())
    if n > len(population):
        raise SampleError(f"requested {n} blocks but population has {len(population)}")
    rng = random.Random(seed)
    if not stratify_by_category:
        return rng.sample(population, n)

    missing = [b.block_id for b in population if b.category is None]
    if missing:
        raise SampleError(
            "stratified sampling requires a category on every block; missing on: "
            + ", ".join(missing)
        )
    groups: dict[str, list[Block]] = {}
    for block in population:
        groups.setdefault(block.category, []).append(block)
    allocation = allocate_largest_remainder(
        {cat: len(members) for cat, members in groups.items()}, n
    )
    sampled: list[Block] = []
    for cat in sorted(groups):
        take = allocation[cat]
        if take:
            sampled.extend(rng.sample(groups[cat], take))
    return sampled


def allocate_largest_remainder(counts: Mapping[str, int], n: int) -> dict[str, int]:
    """Apportion n among keys proportionally to counts (Hamilton's method)."""
    total = sum(counts.values())
    if total == 0:
        raise SampleError("cannot allocate over an empty population")
    quotas = {key: n * count / total for key, count in counts.items()}
    allocation = {key: math.floor(q) for key, q in quotas.items()}
    leftover = n - sum(allocation.values())
    by_remainder = sorted(quotas, key=lambda key: (-(quotas[key] - allocation[key]), key))
    for key in by_remainder[:leftover]:
        allocation[key] += 1
    return allocation


def save_snapshot(snapshot: CorpusSnapshot, directory: str | Path) -> Path:
    """Write blocks.jsonl plus a sidecar manifest; returns the directory path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / BLOCKS_FILENAME, "w", encoding="utf-8") as fh:
        for block in snapshot.blocks.values():
            fh.write(json.dumps(block.to_record(), ensure_ascii=False, sort_keys=True) + "\n")
    manifest = {"snapshot_date": snapshot.snapshot_date, "block_count": len(snapshot)}
    with open(directory / MANIFEST_FILENAME, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, ensure_ascii=False, sort_keys=True) + "\n")
    return directory


def load_snapshot(directory: str | Path) -> CorpusSnapshot:
    """Load a persisted snapshot, re-deriving ids to detect corruption."""
    directory = Path(directory)
    with open(directory / MANIFEST_FILENAME, encoding="utf-8") as fh:
        manifest = json.load(fh)
    with open(directory / BLOCKS_FILENAME, encoding="utf-8") as fh:
        stored = [json.loads(line) for line in fh if line.strip()]
    snapshot = ingest_snapshot(
        stored,
        BlockFilter(min_chars=0, max_chars=2**31),
        snapshot_date=manifest["snapshot_date"],
    )
    stored_ids = [rec.get("block_id") for rec in stored]
    if any(sid is not None for sid in stored_ids) and stored_ids != list(snapshot.blocks.keys()):
        raise CorruptionError(f"stored block ids in {directory} do not match recomputed ids")
    if manifest.get("block_count") != len(snapshot):
        raise CorruptionError(
            f"manifest block_count {manifest.get('block_count')} != {len(snapshot)} blocks on disk"
        )
    return snapshot
