import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import jensenshannon

from uptok import (
    CostModelParams,
    PlantedScorer,
    ScoreRequest,
    accuracy_sweep,
    avg_score_by_rank,
    confidence,
    direct_cost_factor,
    histogram,
    js_distance,
    mean_separation,
    rerank_cost_factor,
)
from uptok.analytics import JS_DISTANCE_MAX, ScoreHistogram


def hist_from_counts(counts, lo=0.0, hi=1.0):
    counts = np.asarray(counts)
    edges = np.linspace(lo, hi, len(counts) + 1)
    return ScoreHistogram(bin_edges=edges, counts=counts)


class TestHistogram:
    def test_two_bins(self):
        h = histogram([0.1, 0.9], bins=2, value_range=(0.0, 1.0))
        assert h.counts.tolist() == [1, 1]
        assert h.total == 2

    def test_point_mass(self):
        h = histogram([0.5] * 10, bins=10, value_range=(0.0, 1.0))
        assert h.counts[5] == 10
        assert h.total == 10

    def test_out_of_range_clamps_into_boundary_bins(self):
        h = histogram([-3.0, 0.2, 7.0], bins=4, value_range=(0.0, 1.0))
        assert h.counts.tolist() == [2, 0, 0, 1]

    def test_rightmost_bin_closed(self):
        h = histogram([1.0], bins=4, value_range=(0.0, 1.0))
        assert h.counts.tolist() == [0, 0, 0, 1]

    def test_planted_relevant_mass_stays_in_band(self):
        scorer = PlantedScorer(21, {"q": {f"e{i}" for i in range(1000)}})
        scores = [scorer.score(ScoreRequest("q", f"e{i}")) for i in range(1000)]
        h = histogram(scores, bins=50, value_range=(0.0, 1.0))
        # 50 bins of width 0.02: [0.78, 0.98) spans bins 39..48
        assert h.counts[:39].sum() == 0
        assert h.counts[39:49].sum() == 1000
        assert h.counts[49:].sum() == 0

    def test_empty_scores_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            histogram([], bins=4)

    def test_bad_range_rejected(self):
        with pytest.raises(ValueError, match="range"):
            histogram([0.5], bins=4, value_range=(1.0, 0.0))


class TestMeanSeparation:
    def test_identical_sets(self):
        assert mean_separation([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_hand_arithmetic(self):
        assert mean_separation([0.8, 0.6], [0.2, 0.4]) == pytest.approx(0.4, abs=1e-12)

    def test_translation_invariant(self):
        rng = np.random.default_rng(0)
        pos = rng.uniform(size=20)
        neg = rng.uniform(size=30)
        base = mean_separation(pos, neg)
        for shift in (-2.0, 0.5, 10.0):
            assert mean_separation(pos + shift, neg + shift) == pytest.approx(
                base, abs=1e-9
            )

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_separation([], [0.5])


class TestJsDistance:
    def test_identical_histograms(self):
        h = hist_from_counts([3, 5, 2])
        assert js_distance(h, h) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_supports_hit_upper_bound(self):
        p = hist_from_counts([1, 0])
        q = hist_from_counts([0, 1])
        assert js_distance(p, q) == pytest.approx(0.83255, abs=1e-5)
        assert js_distance(p, q) == pytest.approx(math.sqrt(math.log(2)), abs=1e-12)

    def test_hand_computed_half_mixture(self):
        # P=[1,0], Q=[.5,.5]: KL(P||M)=ln(4/3), KL(Q||M)=ln(4/3)/2,
        # distance = sqrt(3/4 * ln(4/3)) = 0.46450...
        p = hist_from_counts([1, 0])
        q = hist_from_counts([1, 1])
        assert js_distance(p, q) == pytest.approx(0.4645, abs=1e-3)
        assert js_distance(p, q) == pytest.approx(
            math.sqrt(0.75 * math.log(4 / 3)), abs=1e-12
        )

    def test_mismatched_edges_rejected(self):
        p = hist_from_counts([1, 2])
        q = hist_from_counts([1, 2], lo=0.0, hi=2.0)
        with pytest.raises(ValueError, match="bin edges"):
            js_distance(p, q)

    def test_matches_scipy_on_random_histograms(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            bins = int(rng.integers(2, 30))
            p = hist_from_counts(rng.integers(0, 50, size=bins))
            q = hist_from_counts(rng.integers(0, 50, size=bins))
            if p.total == 0 or q.total == 0:
                continue
            expected = jensenshannon(
                p.counts / p.total, q.counts / q.total, base=math.e
            )
            assert js_distance(p, q) == pytest.approx(float(expected), abs=1e-10)

    @given(
        st.lists(st.integers(0, 40), min_size=2, max_size=20),
        st.lists(st.integers(0, 40), min_size=2, max_size=20),
    )
    def test_symmetric_and_bounded(self, a, b):
        size = min(len(a), len(b))
        pa, qa = a[:size], b[:size]
        if sum(pa) == 0 or sum(qa) == 0:
            return
        p = hist_from_counts(pa)
        q = hist_from_counts(qa)
        d_pq = js_distance(p, q)
        assert d_pq == pytest.approx(js_distance(q, p), abs=1e-12)
        assert 0.0 <= d_pq <= JS_DISTANCE_MAX + 1e-9


class TestAccuracySweep:
    def test_perfectly_separated(self):
        curve = accuracy_sweep(
            [0.9, 0.8], [0.1, 0.2], thresholds=np.arange(0.0, 1.0001, 0.05)
        )
        assert curve.best_accuracy == 1.0
        assert curve.best_threshold == pytest.approx(0.25)

    def test_indistinguishable_sets(self):
        scores = [0.2, 0.5, 0.8]
        curve = accuracy_sweep(scores, scores)
        assert np.allclose(curve.accuracy, 0.5)
        assert curve.best_accuracy == pytest.approx(0.5)

    def test_extreme_thresholds_give_half(self):
        curve = accuracy_sweep([0.4, 0.6], [0.3, 0.5], thresholds=[0.0, 1.01])
        # Below all scores: everything labeled relevant; above all: nothing.
        assert curve.accuracy[0] == pytest.approx(0.5)
        assert curve.accuracy[-1] == pytest.approx(0.5)
        assert curve.pos_kept[0] == 1.0
        assert curve.neg_rejected[0] == 0.0

    def test_accuracy_is_mean_of_curves(self):
        rng = np.random.default_rng(3)
        curve = accuracy_sweep(rng.uniform(size=40), rng.uniform(size=60))
        assert np.allclose(
            curve.accuracy, (curve.pos_kept + curve.neg_rejected) / 2.0
        )
        assert curve.best_accuracy >= 0.5

    def test_first_max_wins_ties(self):
        curve = accuracy_sweep([0.9], [0.1], thresholds=[0.3, 0.5, 0.7])
        assert curve.best_threshold == 0.3

    def test_empty_thresholds_rejected(self):
        with pytest.raises(ValueError, match="thresholds"):
            accuracy_sweep([0.5], [0.4], thresholds=[])

    def test_descending_thresholds_rejected(self):
        with pytest.raises(ValueError, match="ascending"):
            accuracy_sweep([0.5], [0.4], thresholds=[0.9, 0.1])


class TestConfidence:
    def test_perfect(self):
        assert confidence(1.0, 1.0) == 1.0

    def test_zero_annihilates(self):
        assert confidence(0.0, 0.9) == 0.0
        assert confidence(0.9, 0.0) == 0.0

    def test_hand_value(self):
        assert confidence(0.5, 0.8) == pytest.approx(0.63246, abs=1e-5)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            confidence(1.2, 0.5)
        with pytest.raises(ValueError):
            confidence(0.5, -0.1)

    @given(
        st.floats(0.0, 1.0, allow_nan=False),
        st.floats(0.0, 1.0, allow_nan=False),
    )
    def test_symmetric_and_idempotent_on_diagonal(self, a, b):
        assert confidence(a, b) == confidence(b, a)
        assert confidence(a, a) == pytest.approx(a, abs=1e-12)


class TestAvgScoreByRank:
    def test_single_run(self):
        values, fill = avg_score_by_rank([[0.9, 0.7]], depth=2)
        assert values == [0.9, 0.7]
        assert fill == [1.0, 1.0]

    def test_ragged_runs(self):
        values, fill = avg_score_by_rank([[0.8], [0.6, 0.4]], depth=2)
        assert values[0] == pytest.approx(0.7)
        assert values[1] == pytest.approx(0.4)
        assert fill == [1.0, 0.5]

    def test_all_empty_runs(self):
        values, fill = avg_score_by_rank([[], []], depth=2)
        assert values == [None, None]
        assert fill == [0.0, 0.0]

    def test_no_runs_rejected(self):
        with pytest.raises(ValueError, match="at least one run"):
            avg_score_by_rank([], depth=2)

    def test_depth_validation(self):
        with pytest.raises(ValueError, match="depth"):
            avg_score_by_rank([[0.5]], depth=0)


class TestCostModel:
    def test_published_anchor_l20(self):
        params = CostModelParams(rho=35, corpus_size=1281)
        assert round(rerank_cost_factor(20, params), 2) == 1.55

    def test_published_anchor_l10(self):
        params = CostModelParams(rho=35, corpus_size=1281)
        assert round(rerank_cost_factor(10, params), 2) == 1.27

    def test_no_rerank_is_baseline(self):
        assert rerank_cost_factor(0, CostModelParams(rho=9, corpus_size=10)) == 1.0

    def test_direct_factor_is_rho(self):
        assert direct_cost_factor(CostModelParams(rho=35, corpus_size=1281)) == 35.0

    def test_affine_in_l(self):
        params = CostModelParams(rho=7.0, corpus_size=100)
        slope = params.rho / params.corpus_size
        for l in (0, 1, 5, 50):
            assert rerank_cost_factor(l, params) == pytest.approx(
                1.0 + slope * l, abs=1e-12
            )

    def test_negative_l_rejected(self):
        with pytest.raises(ValueError):
            rerank_cost_factor(-1, CostModelParams())

    def test_params_validation(self):
        with pytest.raises(ValueError):
            CostModelParams(rho=0)
        with pytest.raises(ValueError):
            CostModelParams(corpus_size=0)
