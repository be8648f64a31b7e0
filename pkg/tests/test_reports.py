import json

import pytest

from uptok import (
    PlantedScorer,
    SelectionPolicy,
    emit_report,
    flatten_report,
    load_report,
    run_retrieval_experiment,
    run_separation_experiment,
)
from uptok.reports import report_to_csv

from conftest import build_world
from test_experiments import make_triplets, triplet_relevance


@pytest.fixture
def retrieval_report():
    entries, queries, relevance = build_world(
        seed=6, n_entries=40, n_queries=5, dim=8, relevant_per_query=3
    )
    scorer = PlantedScorer(6, relevance)
    policies = [
        SelectionPolicy("top_k_clip", k=3),
        SelectionPolicy("rerank", k=3, l=20),
    ]
    return run_retrieval_experiment(entries, queries, policies, scorer)


class TestEmitReport:
    def test_json_roundtrip(self, retrieval_report, tmp_path):
        path = tmp_path / "report.json"
        emit_report(retrieval_report, path, "json")
        assert load_report(path) == retrieval_report

    def test_csv_has_per_method_rows(self, retrieval_report, tmp_path):
        path = tmp_path / "report.csv"
        emit_report(retrieval_report, path, "csv")
        text = path.read_text()
        lines = text.splitlines()
        assert lines[0] == "method,metric,value"
        assert any(line.startswith("rerank_l20,avg_rs_rank1,") for line in lines)
        assert any(line.startswith("top_k_clip,mean_avg_rs,") for line in lines)

    def test_unknown_format_rejected(self, retrieval_report, tmp_path):
        with pytest.raises(ValueError, match="unknown report format"):
            emit_report(retrieval_report, tmp_path / "r.xml", "xml")

    def test_unwritable_path_raises(self, retrieval_report, tmp_path):
        with pytest.raises(OSError):
            emit_report(retrieval_report, tmp_path / "missing" / "r.json", "json")


class TestFlatten:
    def test_rank_vectors_expand_positionally(self, retrieval_report):
        rows = flatten_report(retrieval_report)
        metrics = {(method, metric) for method, metric, _ in rows}
        assert ("rerank_l20", "avg_rs_rank1") in metrics
        assert ("rerank_l20", "fill_rate_rank5") in metrics
        assert ("rerank_l20", "cost_factor_model") in metrics

    def test_none_positions_skipped(self):
        report = {
            "methods": {
                "direct_rs": {
                    "avg_rs_by_rank": [0.9, None],
                    "fill_rate": [1.0, 0.0],
                    "mean_avg_rs": 0.9,
                }
            }
        }
        rows = flatten_report(report)
        metrics = [metric for _, metric, _ in rows]
        assert "avg_rs_rank1" in metrics
        assert "avg_rs_rank2" not in metrics

    def test_separation_report_flattens_under_scorer_name(self):
        triplets = make_triplets(5)
        scorer = PlantedScorer(1, triplet_relevance(triplets))
        report = run_separation_experiment(triplets, scorer)
        rows = flatten_report(report)
        assert ("planted-1", "best_accuracy") in {
            (method, metric) for method, metric, _ in rows
        }

    def test_csv_parses_back(self, retrieval_report):
        import csv
        import io

        rows = list(csv.reader(io.StringIO(report_to_csv(retrieval_report))))
        assert rows[0] == ["method", "metric", "value"]
        for method, metric, value in rows[1:]:
            float(value)  # every emitted value is numeric
