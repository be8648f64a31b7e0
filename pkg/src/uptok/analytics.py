"""Score-distribution instruments and the retrieval cost model.

Everything here is a pure function over immutable inputs: histograms,
separation measures, the threshold-accuracy sweep, rank-position averages,
the confidence combiner, and the linear cost model relating shortlist size
to retrieval slowdown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .validation import check_unit_interval

# Jensen-Shannon distance (natural log) maxes out at sqrt(ln 2) for
# distributions with disjoint support.
JS_DISTANCE_MAX = math.sqrt(math.log(2.0))

DEFAULT_BINS = 50
DEFAULT_THRESHOLD_STEPS = 201  # 0 to 1 in steps of 0.005


@dataclass(frozen=True)
class ScoreHistogram:
    """Fixed-range histogram of scores.

    ``bin_edges`` has length B+1 and is strictly increasing; ``counts`` has
    length B and sums to ``total``. The rightmost bin is closed.
    """

    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def probabilities(self) -> np.ndarray:
        """Counts normalized to a probability vector."""
        total = self.total
        if total == 0:
            raise ValueError("histogram is empty")
        return self.counts / total

    def to_dict(self) -> dict:
        return {
            "bin_edges": [float(e) for e in self.bin_edges],
            "counts": [int(c) for c in self.counts],
            "total": self.total,
        }


@dataclass(frozen=True)
class AccuracyCurve:
    """Threshold sweep for the rule "score >= t means relevant".

    ``pos_kept`` is the fraction of relevant scores surviving each
    threshold (one minus the empirical CDF); ``neg_rejected`` is the
    fraction of irrelevant scores below it (the empirical CDF). Accuracy
    at each threshold is the mean of the two, and the best point is the
    argmax, ties resolved toward the smallest threshold.
    """

    thresholds: np.ndarray
    pos_kept: np.ndarray
    neg_rejected: np.ndarray
    accuracy: np.ndarray
    best_threshold: float
    best_accuracy: float

    def to_dict(self) -> dict:
        return {
            "thresholds": [float(t) for t in self.thresholds],
            "pos_kept": [float(v) for v in self.pos_kept],
            "neg_rejected": [float(v) for v in self.neg_rejected],
            "accuracy": [float(v) for v in self.accuracy],
            "best_threshold": self.best_threshold,
            "best_accuracy": self.best_accuracy,
        }


@dataclass(frozen=True)
class CostModelParams:
    """Parameters of the linear retrieval cost model.

    ``rho`` is the slowdown of scoring the whole corpus with the expensive
    scorer relative to one embedding scan; ``corpus_size`` is the number of
    entries that scan covers. Defaults match the published operating point
    (rho=35 over a 1281-entry corpus).
    """

    rho: float = 35.0
    corpus_size: int = 1281

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.corpus_size < 1:
            raise ValueError(f"corpus_size must be >= 1, got {self.corpus_size}")


def _as_scores(values, name: str) -> np.ndarray:
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def histogram(
    scores, bins: int = DEFAULT_BINS, value_range: tuple[float, float] = (0.0, 1.0)
) -> ScoreHistogram:
    """Histogram ``scores`` over ``value_range`` with uniform bins.

    Scores outside the range are clamped into the boundary bins rather than
    dropped, so the total always equals the input count.
    """
    arr = _as_scores(scores, "scores")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    lo, hi = float(value_range[0]), float(value_range[1])
    if not lo < hi:
        raise ValueError(f"invalid range: [{lo}, {hi})")
    clipped = np.clip(arr, lo, hi)
    counts, edges = np.histogram(clipped, bins=bins, range=(lo, hi))
    return ScoreHistogram(bin_edges=edges, counts=counts)


def mean_separation(pos_scores, neg_scores) -> float:
    """Absolute distance between the mean relevant and irrelevant scores."""
    pos = _as_scores(pos_scores, "pos_scores")
    neg = _as_scores(neg_scores, "neg_scores")
    return float(abs(pos.mean() - neg.mean()))


def js_distance(p: ScoreHistogram, q: ScoreHistogram) -> float:
    """Jensen-Shannon distance between two histograms on identical bins.

    Natural-log variant: sqrt((KL(P||M) + KL(Q||M)) / 2) where M is the
    midpoint mixture and 0*log(0) counts as 0. Symmetric, zero iff the
    normalized histograms coincide, and bounded by sqrt(ln 2) ~ 0.8326.
    """
    if p.bin_edges.shape != q.bin_edges.shape or not np.array_equal(
        p.bin_edges, q.bin_edges
    ):
        raise ValueError("histograms must share identical bin edges")
    P = p.probabilities()
    Q = q.probabilities()
    M = (P + Q) / 2.0

    def kl(a: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log(a[mask] / M[mask])))

    divergence = (kl(P) + kl(Q)) / 2.0
    return math.sqrt(max(divergence, 0.0))


def default_thresholds() -> np.ndarray:
    """The default sweep grid: 0 to 1 inclusive in steps of 0.005."""
    return np.linspace(0.0, 1.0, DEFAULT_THRESHOLD_STEPS)


def accuracy_sweep(
    pos_scores, neg_scores, thresholds=None
) -> AccuracyCurve:
    """Sweep classification thresholds over relevant/irrelevant score sets.

    Classification rule: score >= t is labeled relevant. Accuracy at t is
    the unweighted mean of the kept-relevant and rejected-irrelevant
    fractions, which treats the two classes symmetrically regardless of
    their sizes.
    """
    pos = np.sort(_as_scores(pos_scores, "pos_scores"))
    neg = np.sort(_as_scores(neg_scores, "neg_scores"))
    grid = (
        default_thresholds()
        if thresholds is None
        else np.asarray(list(thresholds), dtype=np.float64)
    )
    if grid.size == 0:
        raise ValueError("thresholds must be nonempty")
    if np.any(np.diff(grid) < 0):
        raise ValueError("thresholds must be ascending")

    # searchsorted(side="left") counts values strictly below each threshold
    pos_below = np.searchsorted(pos, grid, side="left")
    neg_below = np.searchsorted(neg, grid, side="left")
    pos_kept = 1.0 - pos_below / pos.size
    neg_rejected = neg_below / neg.size
    accuracy = (pos_kept + neg_rejected) / 2.0

    best_index = int(np.argmax(accuracy))  # first max = smallest threshold
    return AccuracyCurve(
        thresholds=grid,
        pos_kept=pos_kept,
        neg_rejected=neg_rejected,
        accuracy=accuracy,
        best_threshold=float(grid[best_index]),
        best_accuracy=float(accuracy[best_index]),
    )


def confidence(cs: float, rs: float) -> float:
    """Geometric mean of a correctness score and a relevancy score.

    Zero if either input is zero: a response cannot be confident when the
    context is irrelevant or the answer is wrong, no matter how strong the
    other half looks.
    """
    cs = check_unit_interval(cs, "cs")
    rs = check_unit_interval(rs, "rs")
    return math.sqrt(cs * rs)


def avg_score_by_rank(
    runs: Sequence[Sequence[float]], depth: int
) -> tuple[list[float | None], list[float]]:
    """Positionwise mean score over ranked runs of varying length.

    Position p (1-based, up to ``depth``) averages only the runs that hold
    at least p entries; ``fill_rate[p-1]`` is the fraction of runs that do.
    A position no run reaches reports None, never a fake zero.
    """
    runs = [list(run) for run in runs]
    if not runs:
        raise ValueError("avg_score_by_rank requires at least one run")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    values: list[float | None] = []
    fill_rates: list[float] = []
    for position in range(depth):
        present = [run[position] for run in runs if len(run) > position]
        fill_rates.append(len(present) / len(runs))
        values.append(float(np.mean(present)) if present else None)
    return values, fill_rates


def rerank_cost_factor(l: int, params: CostModelParams) -> float:
    """Modeled slowdown of two-stage retrieval relative to one embedding scan.

    The stage-1 scan costs 1 by normalization; each of the l re-scored
    candidates costs rho/corpus_size of a scan, so the factor is affine in
    l: 1 + l * rho / corpus_size. l=0 degenerates to the baseline.
    """
    if l < 0:
        raise ValueError(f"l must be >= 0, got {l}")
    return 1.0 + l * params.rho / params.corpus_size


def direct_cost_factor(params: CostModelParams) -> float:
    """Modeled slowdown of scoring the whole corpus directly: rho."""
    return float(params.rho)
