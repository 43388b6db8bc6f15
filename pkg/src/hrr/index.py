"""Per-level vector index with exact top-k search.

The index is an exact brute-force scan: every entry is scored with the
package's one cosine routine and the top k are selected under the total
order (score descending, chunk id ascending). That order makes results a
deterministic function of (index, query, k) and lets a naive full rescan
serve as the correctness oracle. Desk-scale corpora do not need an
approximate index; anything smarter must sit behind this same interface.
"""

from __future__ import annotations

import heapq
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Corpus, Level
from .embedding import EmbeddingProvider, cosine_similarity, embed_batch, ensure_unit
from .errors import (
    DimensionMismatchError,
    InvalidCorpusError,
    InvalidInputError,
    SnapshotFormatError,
)

_MAGIC = b"HRRIDX1\n"


@dataclass(frozen=True)
class SearchHit:
    chunk_id: str
    score: float


class LevelIndex:
    """Immutable (chunk id, embedding) store for one hierarchy level."""

    def __init__(self, level: Level, chunk_ids: Sequence[str], vectors: np.ndarray) -> None:
        if len(chunk_ids) == 0:
            raise InvalidCorpusError(f"no entries for level {level.value!r}")
        if len(set(chunk_ids)) != len(chunk_ids):
            raise InvalidCorpusError("duplicate chunk ids in index")
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[0] != len(chunk_ids):
            raise InvalidInputError(
                f"vectors shape {vectors.shape} does not match {len(chunk_ids)} ids"
            )
        self.level = level
        self.chunk_ids: tuple[str, ...] = tuple(chunk_ids)
        self.vectors = vectors
        self.vectors.setflags(write=False)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.chunk_ids)

    def search(self, query: np.ndarray, k: int) -> list[SearchHit]:
        """Exact top-k by cosine, ties broken by chunk id ascending."""
        if k < 1:
            raise InvalidInputError("k must be >= 1")
        query = ensure_unit(query, self.dimension)
        if query.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"query dimension {query.shape[0]} != index dimension {self.dimension}"
            )
        scores = [cosine_similarity(self.vectors[i], query) for i in range(len(self))]
        best = heapq.nsmallest(
            k, range(len(self)), key=lambda i: (-scores[i], self.chunk_ids[i])
        )
        return [SearchHit(self.chunk_ids[i], scores[i]) for i in best]


def build_index(corpus: Corpus, level: Level, provider: EmbeddingProvider) -> LevelIndex:
    """Embed every chunk at ``level`` and index it, one entry per chunk."""
    nodes = corpus.nodes_at(level)
    if not nodes:
        raise InvalidCorpusError(f"corpus has no chunks at level {level.value!r}")
    texts = [corpus.chunk_text(node.id) for node in nodes]
    vectors = embed_batch(provider, texts)
    return LevelIndex(level, [node.id for node in nodes], np.stack(vectors))


def save_index(index: LevelIndex, path: str | Path) -> None:
    """Write a versioned binary snapshot: magic, JSON header, raw entries."""
    header = json.dumps(
        {"level": index.level.value, "dimension": index.dimension, "count": len(index)},
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for chunk_id, vector in zip(index.chunk_ids, index.vectors):
            id_bytes = chunk_id.encode("utf-8")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(vector.astype("<f4").tobytes())


def load_index(path: str | Path) -> LevelIndex:
    """Load a snapshot written by ``save_index``; search results round-trip."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
        (header_len,) = struct.unpack("<I", _read_exact(fh, 4, path))
        header = json.loads(_read_exact(fh, header_len, path).decode("utf-8"))
        level = Level(header["level"])
        dimension = int(header["dimension"])
        count = int(header["count"])
        ids: list[str] = []
        vectors = np.empty((count, dimension), dtype=np.float32)
        for row in range(count):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, path))
            ids.append(_read_exact(fh, id_len, path).decode("utf-8"))
            raw = _read_exact(fh, 4 * dimension, path)
            vectors[row] = np.frombuffer(raw, dtype="<f4")
        if fh.read(1):
            raise SnapshotFormatError(f"{path}: trailing bytes after {count} entries")
    return LevelIndex(level, ids, vectors)


def _read_exact(fh, n: int, path) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise SnapshotFormatError(f"{path}: truncated snapshot")
    return data
