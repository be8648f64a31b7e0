"""Two-stage multimodal retrieval with relevancy re-ranking and up-to-k selection.

The pipeline: an embedding scan proposes a shortlist of l candidates, a
calibrated relevancy scorer re-scores them, and adaptive up-to-k selection
keeps at most k entries, possibly none, dropping everything that looks
irrelevant. The package also ships the analytics used to compare scorers
(histograms, mean separation, Jensen-Shannon distance, threshold sweeps)
and an experiment harness with a CLI.
"""

from .analytics import (
    AccuracyCurve,
    CostModelParams,
    ScoreHistogram,
    accuracy_sweep,
    avg_score_by_rank,
    confidence,
    direct_cost_factor,
    histogram,
    js_distance,
    mean_separation,
    rerank_cost_factor,
)
from .datasets import (
    EvalTriplet,
    QueryRecord,
    load_corpus,
    load_queries,
    load_response_table,
    load_score_table,
    load_triplets,
)
from .errors import DataError, ScorerError
from .experiments import (
    EchoResponder,
    ExperimentConfig,
    TableResponder,
    run_e2e_experiment,
    run_retrieval_experiment,
    run_separation_experiment,
)
from .reports import emit_report, flatten_report, load_report
from .retriever import (
    ContextRetriever,
    RetrievalTiming,
    clip_top_k_retrieve,
    direct_retrieve,
    measure_retrieval,
    retrieve,
    two_stage_retrieve,
)
from .scorers import (
    EmbeddingCosineScorer,
    NoisyClipLikeScorer,
    PlantedScorer,
    RemoteScorer,
    Scorer,
    ScoreRequest,
    ScorerDescriptor,
    TableScorer,
)
from .selection import (
    ScoredCandidate,
    SelectionPolicy,
    select_top_k,
    select_up_to_k,
)
from .store import CorpusEntry, SimilarityHit, VectorStore, cosine, normalize

__version__ = "0.1.0"

__all__ = [
    "AccuracyCurve",
    "ContextRetriever",
    "CorpusEntry",
    "CostModelParams",
    "DataError",
    "EchoResponder",
    "EmbeddingCosineScorer",
    "EvalTriplet",
    "ExperimentConfig",
    "NoisyClipLikeScorer",
    "PlantedScorer",
    "QueryRecord",
    "RemoteScorer",
    "RetrievalTiming",
    "ScoreHistogram",
    "ScoreRequest",
    "ScoredCandidate",
    "Scorer",
    "ScorerDescriptor",
    "ScorerError",
    "SelectionPolicy",
    "SimilarityHit",
    "TableResponder",
    "TableScorer",
    "VectorStore",
    "accuracy_sweep",
    "avg_score_by_rank",
    "clip_top_k_retrieve",
    "confidence",
    "cosine",
    "direct_cost_factor",
    "direct_retrieve",
    "emit_report",
    "flatten_report",
    "histogram",
    "js_distance",
    "load_corpus",
    "load_queries",
    "load_report",
    "load_response_table",
    "load_score_table",
    "load_triplets",
    "mean_separation",
    "measure_retrieval",
    "normalize",
    "rerank_cost_factor",
    "retrieve",
    "run_e2e_experiment",
    "run_retrieval_experiment",
    "run_separation_experiment",
    "select_top_k",
    "select_up_to_k",
    "two_stage_retrieve",
]
