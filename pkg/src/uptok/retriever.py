"""Retrieval drivers for the three selection methods, plus an estimator facade.

Three ways to turn a query into at most k corpus entries:

* ``clip_top_k_retrieve``: stage-1 only, fixed k by embedding cosine. The
  cheap baseline; never calls the expensive scorer.
* ``two_stage_retrieve``: stage-1 shortlist of size l, re-scored by the
  expensive scorer, cut down by up-to-k selection. Expensive-scorer cost
  is bounded by l per query.
* ``direct_retrieve``: the expensive scorer over the whole corpus, then
  up-to-k selection. The quality ceiling, at full-corpus scoring cost.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .scorers import Scorer
from .selection import (
    ScoredCandidate,
    SelectionPolicy,
    select_up_to_k,
)
from .store import CorpusEntry, VectorStore


@dataclass(frozen=True)
class RetrievalTiming:
    """Wall-clock stage durations plus the expensive-scorer call count."""

    stage1_duration: float  # seconds spent in the embedding scan
    stage2_duration: float  # seconds spent in expensive scoring
    scored_count: int  # number of stage-2 scorer calls


def _require_calibrated(scorer: Scorer) -> None:
    if not scorer.calibrated:
        raise ValueError(
            f"selection thresholds need a calibrated scorer; {scorer.name!r} "
            "reports calibrated=False"
        )


def clip_top_k_retrieve(
    store: VectorStore, query_embedding, k: int
) -> tuple[list[ScoredCandidate], RetrievalTiming]:
    """Stage-1-only baseline: top-k by embedding cosine, no re-scoring."""
    start = time.perf_counter()
    hits = store.top_l(query_embedding, k)
    stage1 = time.perf_counter() - start
    selected = [
        ScoredCandidate(
            entry_id=hit.entry_id,
            clip_score=hit.clip_score,
            clip_rank=hit.rank,
            final_rank=hit.rank,
        )
        for hit in hits
    ]
    return selected, RetrievalTiming(stage1, 0.0, 0)


def two_stage_retrieve(
    store: VectorStore,
    scorer: Scorer,
    query_text: str,
    query_embedding,
    policy: SelectionPolicy,
) -> tuple[list[ScoredCandidate], RetrievalTiming]:
    """Cheap stage-1 shortlist of size l, re-scored and cut to at most k."""
    if policy.method != "rerank":
        raise ValueError(f"two_stage_retrieve requires method 'rerank', got {policy.method!r}")
    _require_calibrated(scorer)

    start = time.perf_counter()
    hits = store.top_l(query_embedding, policy.l)
    stage1 = time.perf_counter() - start

    items = [store.entry(hit.entry_id) for hit in hits]
    start = time.perf_counter()
    rs_values = scorer.score_batch(query_text, items)
    stage2 = time.perf_counter() - start

    candidates = [
        ScoredCandidate(
            entry_id=hit.entry_id,
            rs=rs,
            clip_score=hit.clip_score,
            clip_rank=hit.rank,
        )
        for hit, rs in zip(hits, rs_values)
    ]
    selected = select_up_to_k(candidates, policy.k, policy.tau_lo, policy.tau_hi)
    return selected, RetrievalTiming(stage1, stage2, len(hits))


def direct_retrieve(
    store: VectorStore,
    scorer: Scorer,
    query_text: str,
    policy: SelectionPolicy,
) -> tuple[list[ScoredCandidate], RetrievalTiming]:
    """Expensive scorer over the whole corpus, then up-to-k selection."""
    if policy.method != "direct_rs":
        raise ValueError(f"direct_retrieve requires method 'direct_rs', got {policy.method!r}")
    _require_calibrated(scorer)

    items = list(store.entries)
    start = time.perf_counter()
    rs_values = scorer.score_batch(query_text, items)
    stage2 = time.perf_counter() - start

    candidates = [
        ScoredCandidate(entry_id=entry.id, rs=rs)
        for entry, rs in zip(items, rs_values)
    ]
    selected = select_up_to_k(candidates, policy.k, policy.tau_lo, policy.tau_hi)
    return selected, RetrievalTiming(0.0, stage2, len(items))


def retrieve(
    store: VectorStore,
    scorer: Scorer | None,
    query_text: str,
    query_embedding,
    policy: SelectionPolicy,
) -> tuple[list[ScoredCandidate], RetrievalTiming]:
    """Dispatch one query through the policy's retrieval method."""
    if policy.method == "top_k_clip":
        if query_embedding is None:
            raise ValueError("top_k_clip retrieval requires a query embedding")
        return clip_top_k_retrieve(store, query_embedding, policy.k)
    if scorer is None:
        raise ValueError(f"method {policy.method!r} requires a scorer")
    if policy.method == "direct_rs":
        return direct_retrieve(store, scorer, query_text, policy)
    if query_embedding is None:
        raise ValueError("rerank retrieval requires a query embedding")
    return two_stage_retrieve(store, scorer, query_text, query_embedding, policy)


def measure_retrieval(
    store: VectorStore,
    scorer: Scorer | None,
    query_text: str,
    query_embedding,
    policy: SelectionPolicy,
    repeats: int = 5,
) -> RetrievalTiming:
    """Median stage timings over ``repeats`` runs, one warm-up excluded.

    Single-shot wall clocks are too jittery to compare methods; the median
    over a few repetitions is stable enough for slowdown ratios.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    retrieve(store, scorer, query_text, query_embedding, policy)  # warm-up
    timings = [
        retrieve(store, scorer, query_text, query_embedding, policy)[1]
        for _ in range(repeats)
    ]
    return RetrievalTiming(
        stage1_duration=statistics.median(t.stage1_duration for t in timings),
        stage2_duration=statistics.median(t.stage2_duration for t in timings),
        scored_count=timings[-1].scored_count,
    )


class ContextRetriever(BaseEstimator):
    """Corpus-backed retriever with scikit-learn parameter semantics.

    ``fit`` ingests corpus entries into an immutable vector store;
    ``retrieve`` runs one query through the configured method. Because all
    constructor arguments are plain parameters, instances clone cleanly and
    ``get_params``/``set_params`` work for grid exploration over k, l and
    the thresholds.

    >>> retriever = ContextRetriever(method="rerank", k=5, l=20, scorer=rs)
    >>> retriever.fit(entries)
    >>> selected, timing = retriever.retrieve("red bicycle", query_embedding=vec)
    """

    def __init__(
        self,
        method: str = "rerank",
        k: int = 5,
        l: int = 20,
        tau_lo: float = 0.3,
        tau_hi: float = 0.75,
        scorer: Scorer | None = None,
    ):
        self.method = method
        self.k = k
        self.l = l
        self.tau_lo = tau_lo
        self.tau_hi = tau_hi
        self.scorer = scorer

    def fit(self, X: Sequence[CorpusEntry], y=None) -> "ContextRetriever":
        """Ingest corpus entries. ``y`` is ignored (API compatibility)."""
        self.policy_ = self._policy()  # validate params before doing work
        self.store_ = VectorStore.ingest(X)
        self.n_entries_ = len(self.store_)
        return self

    def _policy(self) -> SelectionPolicy:
        return SelectionPolicy(
            method=self.method,
            k=self.k,
            l=self.l,
            tau_lo=self.tau_lo,
            tau_hi=self.tau_hi,
        )

    def retrieve(
        self, query_text: str, query_embedding=None
    ) -> tuple[list[ScoredCandidate], RetrievalTiming]:
        """Run one query; returns (selected candidates, stage timings)."""
        if not hasattr(self, "store_"):
            raise NotFittedError(
                "This ContextRetriever instance is not fitted yet; "
                "call fit(entries) first."
            )
        return retrieve(
            self.store_, self.scorer, query_text, query_embedding, self._policy()
        )
