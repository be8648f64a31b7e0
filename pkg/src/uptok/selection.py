"""Candidate selection: fixed top-k and adaptive up-to-k with a median cut.

Up-to-k selection is the piece that lets retrieval return fewer than k
entries, or none at all, when the candidate pool is weak. The rules, with
explicit boundary semantics:

* candidates with rs strictly below tau_lo are eliminated;
* candidates with rs strictly above tau_hi are always kept;
* the middle band [tau_lo, tau_hi] is cut at the median of its own scores
  (odd size: the middle order statistic; even size: the mean of the two
  central ones), keeping entries with rs at or above that median;
* of everything kept, at most k survive, highest rs first.

Ties break by ascending stage-1 rank, then ascending entry id, so output
order is deterministic for any input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from statistics import median
from typing import Sequence

from .validation import check_thresholds

SELECTION_METHODS = ("top_k_clip", "direct_rs", "rerank")


@dataclass(frozen=True)
class ScoredCandidate:
    """A corpus entry moving through the retrieval pipeline.

    ``clip_score``/``clip_rank`` are absent for candidates that never went
    through a stage-1 scan; ``rs`` is absent until stage 2 scores it;
    ``final_rank`` is assigned on selection output (1-based, consecutive).
    """

    entry_id: str
    rs: float | None = None
    clip_score: float | None = None
    clip_rank: int | None = None
    final_rank: int | None = None


@dataclass(frozen=True)
class SelectionPolicy:
    """Parameters governing retrieval and selection.

    Defaults are the operating point used throughout the evaluation
    pipelines: k=5, l=20, tau_lo=0.3, tau_hi=0.75.
    """

    method: str = "rerank"
    k: int = 5
    l: int = 20
    tau_lo: float = 0.3
    tau_hi: float = 0.75

    def __post_init__(self):
        if self.method not in SELECTION_METHODS:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {SELECTION_METHODS}"
            )
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        check_thresholds(self.tau_lo, self.tau_hi)
        if self.method == "rerank":
            if self.l < 1:
                raise ValueError(f"l must be >= 1, got {self.l}")
            if self.l <= self.k:
                raise ValueError(
                    f"rerank requires l > k, got l={self.l}, k={self.k}"
                )

    @property
    def label(self) -> str:
        """Stable identifier used in reports: e.g. 'rerank_l20'."""
        if self.method == "rerank":
            return f"rerank_l{self.l}"
        return self.method


def _tie_key(candidate: ScoredCandidate, score: float):
    # rs desc, then stage-1 rank asc (unranked last), then id asc
    rank = candidate.clip_rank if candidate.clip_rank is not None else math.inf
    return (-score, rank, candidate.entry_id)


def _finalize(ordered: Sequence[ScoredCandidate]) -> list[ScoredCandidate]:
    return [replace(c, final_rank=i + 1) for i, c in enumerate(ordered)]


def _checked_rs(candidate: ScoredCandidate) -> float:
    if candidate.rs is None:
        raise ValueError(f"candidate {candidate.entry_id!r} has no relevancy score")
    if not 0.0 <= candidate.rs <= 1.0:
        raise ValueError(
            f"uncalibrated score: rs={candidate.rs} for entry "
            f"{candidate.entry_id!r} lies outside [0, 1]"
        )
    return candidate.rs


def select_top_k(
    candidates: Sequence[ScoredCandidate], k: int, by: str = "rs"
) -> list[ScoredCandidate]:
    """Plain fixed-size selection: the min(k, n) best by one score, descending.

    ``by`` picks the active score, "rs" or "clip_score". Every candidate
    must carry that score.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if by not in ("rs", "clip_score"):
        raise ValueError(f"unknown score field {by!r}")

    def active(c: ScoredCandidate) -> float:
        value = getattr(c, by)
        if value is None:
            raise ValueError(f"candidate {c.entry_id!r} has no {by}")
        return value

    ordered = sorted(candidates, key=lambda c: _tie_key(c, active(c)))
    return _finalize(ordered[: min(k, len(ordered))])


def select_up_to_k(
    candidates: Sequence[ScoredCandidate],
    k: int,
    tau_lo: float,
    tau_hi: float,
) -> list[ScoredCandidate]:
    """Adaptive selection returning at most k candidates, possibly zero.

    See the module docstring for the full rules. Raises ValueError if any
    candidate's rs is missing or outside [0, 1] ("uncalibrated score").
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    tau_lo, tau_hi = check_thresholds(tau_lo, tau_hi)

    high: list[ScoredCandidate] = []
    mid: list[ScoredCandidate] = []
    for candidate in candidates:
        rs = _checked_rs(candidate)
        if rs < tau_lo:
            continue  # eliminated
        if rs > tau_hi:
            high.append(candidate)
        else:
            mid.append(candidate)

    kept = list(high)
    if mid:
        cut = median(c.rs for c in mid)
        kept.extend(c for c in mid if c.rs >= cut)

    ordered = sorted(kept, key=lambda c: _tie_key(c, c.rs))
    return _finalize(ordered[: min(k, len(ordered))])
