"""Dense retrieval over corpus blocks.

Exact brute-force cosine search with deterministic tie-breaking by block_id,
a dependency-free deterministic embedder for tests, an HTTP embedder client,
and an optional listwise LLM reranking pass over the retrieved candidates.
"""

from __future__ import annotations

import dataclasses
import hashlib
import re
import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Block, CorpusSnapshot
from .errors import IndexBuildError, SearchError, TagParseError
from .llm import DecodingConfig, LlmProvider, RunLog, call_template, extract_tagged
from . import templates

_TOKEN_RE = re.compile(r"[a-z0-9]+")

INDEX_MAGIC = b"CCIDX1\n"


class Embedder(ABC):
    """Maps texts to fixed-dimension vectors; one embedder per index."""

    dim: int

    @abstractmethod
    def embed(self, texts: Sequence[str]) -> np.ndarray:
        """Return an array of shape (len(texts), dim)."""


class HashEmbedder(Embedder):
    """Deterministic test embedder: signed token-hash bag of words.

    Tokens are lowercase alphanumeric runs; each token hashes to a bucket and
    a sign, accumulated counts are L2-normalized. Identical texts embed
    identically, so self-retrieval has cosine similarity 1.0. No I/O, no
    model weights.
    """

    def __init__(self, dim: int = 256):
        if dim < 2:
            raise IndexBuildError(f"embedder dim must be >= 2, got {dim}")
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in _TOKEN_RE.findall(text.lower()):
                digest = hashlib.sha1(token.encode("utf-8")).digest()
                value = int.from_bytes(digest[:8], "big")
                bucket = value % self.dim
                sign = 1.0 if (value >> 63) & 1 else -1.0
                out[row, bucket] += sign
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class RemoteEmbedder(Embedder):
    """Client for an embedding service: texts in, vectors out over HTTP."""

    def __init__(self, base_url: str, dim: int, timeout_s: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.dim = dim
        self.timeout_s = timeout_s

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        import httpx

        response = httpx.post(
            f"{self.base_url}/embed", json={"texts": list(texts)}, timeout=self.timeout_s
        )
        response.raise_for_status()
        vectors = np.asarray(response.json()["vectors"], dtype=np.float64)
        if vectors.shape != (len(texts), self.dim):
            raise IndexBuildError(
                f"embedding service returned shape {vectors.shape}, expected {(len(texts), self.dim)}"
            )
        return vectors


@dataclass(frozen=True)
class EvidenceItem:
    """One retrieved block with its cosine similarity and rank positions."""

    block_id: str
    similarity: float
    rank: int
    rerank_rank: int | None = None
    doc_title: str = ""
    text: str = ""

    def to_record(self) -> dict:
        return {
            "block_id": self.block_id,
            "similarity": self.similarity,
            "rank": self.rank,
            "rerank_rank": self.rerank_rank,
            "doc_title": self.doc_title,
            "text": self.text,
        }


class VectorIndex:
    """Immutable exact-cosine index over a fixed set of blocks. Keeps the
    embedder it was built with so queries embed consistently."""

    def __init__(self, blocks: Sequence[Block], matrix: np.ndarray, embedder: Embedder):
        self._blocks = list(blocks)
        self._by_id = {b.block_id: b for b in blocks}
        self._matrix = matrix
        self._matrix.setflags(write=False)
        self._titles = np.array([b.doc_title for b in blocks])
        self._ids = np.array([b.block_id for b in blocks])
        self.embedder = embedder

    def __len__(self) -> int:
        return len(self._blocks)

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    def get_block(self, block_id: str) -> Block | None:
        return self._by_id.get(block_id)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def block_ids(self) -> tuple[str, ...]:
        return tuple(b.block_id for b in self._blocks)

    def save(self, path: str | Path) -> None:
        """Binary layout: magic, dim, count, contiguous float64 vectors, then
        a length-prefixed block_id table."""
        with open(path, "wb") as fh:
            fh.write(INDEX_MAGIC)
            fh.write(struct.pack("<II", self.dim, len(self._blocks)))
            fh.write(self._matrix.astype("<f8").tobytes())
            for block in self._blocks:
                encoded = block.block_id.encode("utf-8")
                fh.write(struct.pack("<H", len(encoded)))
                fh.write(encoded)


def build_index(blocks: Sequence[Block], embedder: Embedder) -> VectorIndex:
    """Embed blocks and build an immutable index; rejects zero vectors and
    dimension drift."""
    if not blocks:
        raise IndexBuildError("cannot build an index over zero blocks")
    matrix = np.asarray(embedder.embed([b.text for b in blocks]), dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(blocks):
        raise IndexBuildError(f"embedder returned shape {matrix.shape} for {len(blocks)} blocks")
    if matrix.shape[1] != embedder.dim:
        raise IndexBuildError(
            f"dimension mismatch: embedder declares dim {embedder.dim}, got {matrix.shape[1]}"
        )
    norms = np.linalg.norm(matrix, axis=1)
    zero_rows = np.where(norms == 0)[0]
    if zero_rows.size:
        raise IndexBuildError(
            f"zero embedding vector for block_id {blocks[int(zero_rows[0])].block_id}"
        )
    matrix = matrix / norms[:, None]
    return VectorIndex(blocks, matrix, embedder)


def load_index(path: str | Path, snapshot: CorpusSnapshot, embedder: Embedder) -> VectorIndex:
    """Load a persisted index, resolving block ids against a snapshot."""
    with open(path, "rb") as fh:
        magic = fh.read(len(INDEX_MAGIC))
        if magic != INDEX_MAGIC:
            raise IndexBuildError(f"{path} is not an index file (bad magic)")
        dim, count = struct.unpack("<II", fh.read(8))
        matrix = np.frombuffer(fh.read(count * dim * 8), dtype="<f8").reshape(count, dim).copy()
        blocks = []
        for _ in range(count):
            (length,) = struct.unpack("<H", fh.read(2))
            block_id = fh.read(length).decode("utf-8")
            block = snapshot.get(block_id)
            if block is None:
                raise IndexBuildError(f"index references unknown block_id {block_id}")
            blocks.append(block)
    if dim != embedder.dim:
        raise IndexBuildError(f"index dim {dim} does not match embedder dim {embedder.dim}")
    return VectorIndex(blocks, matrix, embedder)


def search(
    index: VectorIndex,
    query: str,
    k: int,
    exclude_doc_title: str | None = None,
) -> list[EvidenceItem]:
    """Top-k blocks by cosine similarity, ties broken by block_id ascending.

    Blocks from exclude_doc_title are filtered out before ranking; an index
    emptied by exclusion yields an empty list, not an error.
    """
    if not query or not query.strip():
        raise SearchError("query must be non-empty")
    if k < 1:
        raise SearchError(f"k must be >= 1, got {k}")
    vector = np.asarray(index.embedder.embed([query]), dtype=np.float64)[0]
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise SearchError(f"query produced an empty embedding: {query!r}")
    vector = vector / norm
    similarities = index.matrix @ vector
    eligible = np.arange(len(index))
    if exclude_doc_title is not None:
        eligible = eligible[index._titles != exclude_doc_title]
    if eligible.size == 0:
        return []
    order = eligible[np.lexsort((index._ids[eligible], -similarities[eligible]))]
    top = order[: min(k, order.size)]
    items = []
    for rank, row in enumerate(top, start=1):
        block = index._blocks[int(row)]
        items.append(
            EvidenceItem(
                block_id=block.block_id,
                similarity=float(np.clip(similarities[int(row)], -1.0, 1.0)),
                rank=rank,
                doc_title=block.doc_title,
                text=block.text,
            )
        )
    return items


@dataclass(frozen=True)
class RerankResult:
    items: list[EvidenceItem]
    degraded: bool = False


def rerank(
    query: str,
    items: list[EvidenceItem],
    provider: LlmProvider,
    *,
    decoding: DecodingConfig = DecodingConfig(),
    run_log: RunLog | None = None,
) -> RerankResult:
    """Listwise rerank of retrieved items in a single provider call.

    The provider returns an ordering of 1-based item indices; anything that is
    not a permutation falls back to the original order with degraded=True.
    Candidate lists are small (<= ~20), so no windowing is needed.
    """
    if not items:
        raise SearchError("rerank requires a non-empty item list")
    if len(items) == 1:
        return RerankResult(items=[dataclasses.replace(items[0], rerank_rank=1)])
    passages = templates.format_documents((item.doc_title, item.text) for item in items)
    response = call_template(
        provider,
        templates.RERANK,
        {"query": query, "passages": passages},
        decoding=decoding,
        context={"query": query, "passage_count": len(items)},
        run_log=run_log,
    )
    try:
        indices = [int(tok) for tok in re.findall(r"\d+", extract_tagged(response, "ranking"))]
    except TagParseError:
        indices = []
    if sorted(indices) != list(range(1, len(items) + 1)):
        reordered = list(items)
        degraded = True
    else:
        reordered = [items[i - 1] for i in indices]
        degraded = False
    reranked = [
        dataclasses.replace(item, rerank_rank=position)
        for position, item in enumerate(reordered, start=1)
    ]
    return RerankResult(items=reranked, degraded=degraded)
