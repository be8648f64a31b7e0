"""Relevancy scorers: the shared contract plus four implementations.

A scorer turns one (query text, corpus entry) pair into a scalar. The
``calibrated`` flag is the load-bearing part of the contract: calibrated
scorers guarantee scores in [0, 1], which is what makes threshold-based
selection meaningful. Raw embedding cosine is not calibrated (its range is
[-1, 1]) and therefore cannot drive up-to-k selection.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import AbstractSet, Callable, Mapping, Protocol, Sequence

import httpx
import numpy as np

from .errors import DataError, ScorerError
from .store import cosine

COST_CLASSES = ("cheap", "expensive")


@dataclass(frozen=True)
class ScoreRequest:
    """One (query, entry) pair to be scored."""

    query_text: str
    entry_id: str
    payload_ref: str = ""

    def __post_init__(self):
        if not self.query_text:
            raise ValueError("query_text must be nonempty")


@dataclass(frozen=True)
class ScorerDescriptor:
    """Identity and guarantees of a scorer implementation."""

    name: str
    calibrated: bool  # True iff scores are guaranteed to lie in [0, 1]
    cost_class: str  # "cheap" | "expensive"


class ScoreTarget(Protocol):
    """Anything with an entry id and a payload reference (CorpusEntry qualifies)."""

    @property
    def id(self) -> str: ...

    @property
    def payload_ref(self) -> str: ...


class Scorer:
    """Base class for relevancy scorers.

    Subclasses set ``name``, ``calibrated`` and ``cost_class`` and implement
    ``score``. ``score_batch`` must stay equivalent to sequential ``score``
    calls; override it only to change the execution strategy.
    """

    name: str = "scorer"
    calibrated: bool = True
    cost_class: str = "expensive"

    def describe(self) -> ScorerDescriptor:
        return ScorerDescriptor(self.name, self.calibrated, self.cost_class)

    def score(self, request: ScoreRequest) -> float:
        raise NotImplementedError

    def score_batch(
        self, query_text: str, items: Sequence[ScoreTarget]
    ) -> list[float]:
        """Score ``items`` in order: output[i] corresponds to items[i]."""
        if not items:
            raise ValueError("score_batch requires a nonempty item list")
        return [
            self.score(ScoreRequest(query_text, item.id, item.payload_ref))
            for item in items
        ]


class TableScorer(Scorer):
    """Deterministic lookup over materialized (query, entry) scores.

    A missing pair is a hard error, never a default score: silently filling
    in values would corrupt any downstream distribution analysis.
    """

    cost_class = "expensive"

    def __init__(self, table: Mapping[tuple[str, str], float], name: str = "table"):
        self.name = name
        cleaned: dict[tuple[str, str], float] = {}
        for key, value in table.items():
            value = float(value)
            if not 0.0 <= value <= 1.0:
                raise DataError(
                    f"score table value out of range [0, 1]: {value} for {key!r}"
                )
            cleaned[key] = value
        self._table = cleaned

    def __len__(self) -> int:
        return len(self._table)

    def score(self, request: ScoreRequest) -> float:
        key = (request.query_text, request.entry_id)
        try:
            return self._table[key]
        except KeyError:
            raise ScorerError(
                f"unscored pair: query={request.query_text!r} "
                f"entry={request.entry_id!r}"
            ) from None


class EmbeddingCosineScorer(Scorer):
    """Cosine similarity between query and entry embeddings.

    Cheap but uncalibrated: values range over [-1, 1], so this scorer can
    rank candidates but cannot feed threshold-based selection.
    """

    name = "embedding-cosine"
    calibrated = False
    cost_class = "cheap"

    def __init__(
        self,
        query_embedder: Callable[[str], "np.ndarray"],
        entry_embeddings: Mapping[str, "np.ndarray"],
    ):
        self._query_embedder = query_embedder
        self._entry_embeddings = dict(entry_embeddings)

    def score(self, request: ScoreRequest) -> float:
        if request.entry_id not in self._entry_embeddings:
            raise ScorerError(f"no embedding for entry {request.entry_id!r}")
        return cosine(
            self._query_embedder(request.query_text),
            self._entry_embeddings[request.entry_id],
        )


# 64-bit FNV-1a: a stable, non-cryptographic hash so synthetic scores are
# identical across platforms, processes and runs.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


def _pair_uniform(seed: int, query_text: str, entry_id: str) -> float:
    """Deterministic uniform draw in [0, 1) for one (seed, query, entry)."""
    h = _FNV_OFFSET
    for byte in f"{seed}\x1f{query_text}\x1f{entry_id}".encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _FNV_MASK
    # The hash picks the stream; the Twister's output is far more uniform
    # than raw FNV bits, which matters for distribution-level tests.
    return random.Random(h).random()


class PlantedScorer(Scorer):
    """Synthetic oracle with disjoint score bands for relevant and irrelevant pairs.

    Pairs listed in ``relevance_map`` (query text to the set of entry ids
    relevant to it) score inside [0.78, 0.98); all other pairs score inside
    [0.02, 0.28). The gap between the bands is at least 0.5 by construction,
    so any threshold inside it classifies perfectly. Scores are a pure
    function of (seed, query, entry id).
    """

    name = "planted"
    calibrated = True
    cost_class = "expensive"

    RELEVANT_LOW, RELEVANT_SPAN = 0.78, 0.20
    IRRELEVANT_LOW, IRRELEVANT_SPAN = 0.02, 0.26

    def __init__(
        self,
        seed: int,
        relevance_map: Mapping[str, AbstractSet[str]] | None = None,
    ):
        self.seed = int(seed)
        self.name = f"planted-{self.seed}"
        self._relevant = {
            query: frozenset(ids) for query, ids in (relevance_map or {}).items()
        }

    def is_relevant(self, query_text: str, entry_id: str) -> bool:
        return entry_id in self._relevant.get(query_text, frozenset())

    def score(self, request: ScoreRequest) -> float:
        u = _pair_uniform(self.seed, request.query_text, request.entry_id)
        if self.is_relevant(request.query_text, request.entry_id):
            return self.RELEVANT_LOW + u * self.RELEVANT_SPAN
        return self.IRRELEVANT_LOW + u * self.IRRELEVANT_SPAN


class NoisyClipLikeScorer(Scorer):
    """Synthetic scorer confined to the narrow band [0.13, 0.35].

    Emulates an embedding-similarity scorer whose relevant and irrelevant
    score distributions overlap. ``overlap`` in [0, 1] controls how much:
    at 0 the two distributions sit strictly on either side of the band
    midpoint; at 1 both draw from the identical full-band distribution, so
    no threshold beats coin-flipping. Deterministic in (seed, query, entry).

    Calibrated in the contract sense (scores lie inside [0, 1]) even though
    the usable range is narrow.
    """

    name = "noisy-clip-like"
    calibrated = True
    cost_class = "cheap"

    BAND_LOW, BAND_HIGH = 0.13, 0.35

    def __init__(
        self,
        seed: int,
        relevance_map: Mapping[str, AbstractSet[str]] | None = None,
        overlap: float = 0.5,
    ):
        overlap = float(overlap)
        if not 0.0 <= overlap <= 1.0:
            raise ValueError(f"overlap must lie in [0, 1], got {overlap}")
        self.seed = int(seed)
        self.overlap = overlap
        self.name = f"noisy-clip-like-{self.seed}"
        self._relevant = {
            query: frozenset(ids) for query, ids in (relevance_map or {}).items()
        }
        mid = (self.BAND_LOW + self.BAND_HIGH) / 2.0
        half = (self.BAND_HIGH - self.BAND_LOW) / 2.0
        self._width = half * (1.0 + overlap)
        self._relevant_low = mid - overlap * half
        self._irrelevant_high = mid + overlap * half

    def is_relevant(self, query_text: str, entry_id: str) -> bool:
        return entry_id in self._relevant.get(query_text, frozenset())

    def score(self, request: ScoreRequest) -> float:
        u = _pair_uniform(self.seed, request.query_text, request.entry_id)
        if self.is_relevant(request.query_text, request.entry_id):
            return self._relevant_low + u * self._width
        # Drawn downward from the irrelevant ceiling: at overlap=0 every
        # irrelevant score lands strictly below the band midpoint.
        return self._irrelevant_high - (1.0 - u) * self._width


class RemoteScorer(Scorer):
    """Client for a scorer service speaking the POST /score wire protocol.

    Batches larger than ``chunk_size`` are split and issued with at most
    ``max_inflight`` requests in flight; results are reassembled in input
    order regardless of completion order. Out-of-range scores from the
    service are treated as protocol violations, not clamped.
    """

    calibrated = True
    cost_class = "expensive"

    def __init__(
        self,
        base_url: str,
        *,
        chunk_size: int = 32,
        max_inflight: int = 4,
        timeout: float = 30.0,
        client: httpx.Client | None = None,
    ):
        if chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.name = f"remote:{self.base_url}"
        self._chunk_size = chunk_size
        self._max_inflight = max_inflight
        self._client = client or httpx.Client(base_url=self.base_url, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def score(self, request: ScoreRequest) -> float:
        return self._score_chunk(
            request.query_text, [(request.entry_id, request.payload_ref)]
        )[0]

    def score_batch(
        self, query_text: str, items: Sequence[ScoreTarget]
    ) -> list[float]:
        if not items:
            raise ValueError("score_batch requires a nonempty item list")
        pairs = [(item.id, item.payload_ref) for item in items]
        chunks = [
            pairs[i : i + self._chunk_size]
            for i in range(0, len(pairs), self._chunk_size)
        ]
        if len(chunks) == 1:
            return self._score_chunk(query_text, chunks[0])
        with ThreadPoolExecutor(max_workers=self._max_inflight) as pool:
            per_chunk = list(
                pool.map(lambda chunk: self._score_chunk(query_text, chunk), chunks)
            )
        return [score for chunk_scores in per_chunk for score in chunk_scores]

    def health(self) -> dict:
        """GET /health; returns the parsed body once the service is ready."""
        try:
            response = self._client.get("/health")
        except httpx.HTTPError as exc:
            raise ScorerError(f"scorer service unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ScorerError(
                f"scorer service not ready: HTTP {response.status_code}"
            )
        return response.json()

    def embed(self, items: Sequence[tuple[str, str, str]]) -> list[np.ndarray]:
        """POST /embed for (entry_id, modality, payload_ref) triples."""
        body = {
            "items": [
                {"entry_id": eid, "modality": modality, "payload_ref": ref}
                for eid, modality, ref in items
            ]
        }
        payload = self._post_json("/embed", body)
        vectors = payload.get("embeddings")
        if not isinstance(vectors, list) or len(vectors) != len(items):
            raise ScorerError(
                f"length mismatch: sent {len(items)} items, got "
                f"{len(vectors) if isinstance(vectors, list) else 'no'} embeddings"
            )
        return [np.asarray(vec, dtype=np.float64) for vec in vectors]

    def _post_json(self, path: str, body: dict) -> dict:
        try:
            response = self._client.post(path, json=body)
        except httpx.HTTPError as exc:
            raise ScorerError(f"scorer service request failed: {exc}") from exc
        if not 200 <= response.status_code < 300:
            raise ScorerError(
                f"scorer service returned HTTP {response.status_code}: "
                f"{response.text[:200]}"
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise ScorerError(f"malformed response body: {exc}") from exc
        if not isinstance(payload, dict):
            raise ScorerError("malformed response body: expected a JSON object")
        return payload

    def _score_chunk(
        self, query_text: str, pairs: Sequence[tuple[str, str]]
    ) -> list[float]:
        body = {
            "query": query_text,
            "items": [
                {"entry_id": eid, "payload_ref": ref} for eid, ref in pairs
            ],
        }
        payload = self._post_json("/score", body)
        scores = payload.get("scores")
        if not isinstance(scores, list):
            raise ScorerError("malformed response body: missing 'scores' list")
        if len(scores) != len(pairs):
            raise ScorerError(
                f"length mismatch: sent {len(pairs)} items, got {len(scores)} scores"
            )
        out: list[float] = []
        for (entry_id, _), value in zip(pairs, scores):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ScorerError(
                    f"malformed score {value!r} for entry {entry_id!r}"
                )
            value = float(value)
            if not 0.0 <= value <= 1.0:
                raise ScorerError(
                    f"score out of range [0, 1]: {value} for entry {entry_id!r}"
                )
            out.append(value)
        return out
