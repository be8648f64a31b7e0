"""In-memory vector store: exact cosine scan over normalized embeddings.

The store is built once from a list of corpus entries and is read-only
afterwards, so concurrent queries need no synchronization. Embeddings are
normalized at ingest and at query time, which turns every cosine into a
plain dot product against one matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DataError
from .validation import check_embedding

MODALITIES = ("image", "text")


@dataclass(frozen=True)
class CorpusEntry:
    """One knowledge-base item: identity, modality tag, embedding, payload."""

    id: str
    modality: str  # "image" | "text"
    embedding: np.ndarray
    payload_ref: str = ""


@dataclass(frozen=True)
class SimilarityHit:
    """A stage-1 retrieval hit, ranked by cosine similarity."""

    entry_id: str
    clip_score: float  # cosine similarity, in [-1, 1]
    rank: int  # 1-based, consecutive


def normalize(values) -> np.ndarray:
    """Scale a vector to unit Euclidean norm, preserving its direction."""
    arr = check_embedding(values)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise DataError("degenerate embedding: zero vector cannot be normalized")
    return arr / norm


def cosine(a, b) -> float:
    """Cosine similarity between two nonzero vectors of equal dimension."""
    ua = check_embedding(a)
    ub = check_embedding(b, dim=ua.size)
    ua = normalize(ua)
    ub = normalize(ub)
    return float(np.clip(np.dot(ua, ub), -1.0, 1.0))


class VectorStore:
    """Immutable corpus of entries supporting exact top-l cosine retrieval.

    No approximate index is built: the corpus scale this targets (a few
    thousand entries) makes an exact scan both fast and trivially correct.
    """

    def __init__(self, entries: Iterable[CorpusEntry]):
        entries = tuple(entries)
        if not entries:
            raise DataError("cannot ingest an empty corpus")

        dim = check_embedding(entries[0].embedding).size
        by_id: dict[str, CorpusEntry] = {}
        rows = np.empty((len(entries), dim), dtype=np.float64)
        for i, entry in enumerate(entries):
            if entry.modality not in MODALITIES:
                raise DataError(
                    f"entry {entry.id!r}: unknown modality {entry.modality!r}"
                )
            if entry.id in by_id:
                raise DataError(f"duplicate id {entry.id}")
            vec = check_embedding(entry.embedding)
            if vec.size != dim:
                raise DataError(
                    f"dimension mismatch: entry {entry.id!r} has dim {vec.size}, "
                    f"expected {dim}"
                )
            rows[i] = normalize(vec)
            by_id[entry.id] = entry

        rows.setflags(write=False)
        self._matrix = rows
        self._entries = entries
        self._by_id = by_id
        self._row_of = {e.id: i for i, e in enumerate(entries)}
        self._ids = np.asarray([e.id for e in entries])
        self._dim = dim

    @classmethod
    def ingest(cls, entries: Iterable[CorpusEntry]) -> "VectorStore":
        """Build a store from corpus entries. Re-ingest to change contents."""
        return cls(entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, entry_id: str) -> bool:
        return entry_id in self._by_id

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def entries(self) -> tuple[CorpusEntry, ...]:
        return self._entries

    def entry(self, entry_id: str) -> CorpusEntry:
        try:
            return self._by_id[entry_id]
        except KeyError:
            raise DataError(f"unknown entry id {entry_id!r}") from None

    def embedding(self, entry_id: str) -> np.ndarray:
        """The normalized embedding stored for an entry (read-only view)."""
        try:
            return self._matrix[self._row_of[entry_id]]
        except KeyError:
            raise DataError(f"unknown entry id {entry_id!r}") from None

    def top_l(self, query, l: int) -> list[SimilarityHit]:
        """The min(l, size) entries most cosine-similar to ``query``.

        Hits come back cosine-descending; exact ties break by ascending
        entry id so repeated runs produce identical rankings.
        """
        if l < 1:
            raise ValueError(f"l must be >= 1, got {l}")
        q = normalize(check_embedding(query, dim=self._dim))
        scores = self._matrix @ q
        # lexsort uses the last key as primary: score desc, then id asc
        order = np.lexsort((self._ids, -scores))
        take = min(int(l), len(self._entries))
        return [
            SimilarityHit(
                entry_id=str(self._ids[idx]),
                clip_score=float(np.clip(scores[idx], -1.0, 1.0)),
                rank=pos + 1,
            )
            for pos, idx in enumerate(order[:take])
        ]
