"""Report serialization: canonical JSON and a flattened CSV view."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

REPORT_FORMATS = ("json", "csv")


def report_to_json(report: dict) -> str:
    """Canonical JSON text: sorted keys, stable indentation, trailing newline."""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _scalar(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def flatten_report(report: dict) -> list[tuple[str, str, float]]:
    """Flatten per-method scalar metrics to (method, metric, value) rows.

    Rank vectors become one row per position (``avg_rs_rank1`` and so on);
    None values are skipped. Reports without a methods section (the
    separation experiment) flatten their metrics under the scorer name.
    """
    rows: list[tuple[str, str, float]] = []
    if "methods" in report:
        for label in sorted(report["methods"]):
            entry = report["methods"][label]
            for field, value in sorted(entry.items()):
                if field in ("avg_rs_by_rank", "fill_rate"):
                    prefix = "avg_rs_rank" if field == "avg_rs_by_rank" else "fill_rate_rank"
                    for position, item in enumerate(value, start=1):
                        if item is not None:
                            rows.append((label, f"{prefix}{position}", float(item)))
                elif _scalar(value):
                    rows.append((label, field, float(value)))
    else:
        label = report.get("scorer", {}).get("name", "scorer")
        for field, value in sorted(report.get("metrics", {}).items()):
            if _scalar(value):
                rows.append((label, field, float(value)))
    return rows


def report_to_csv(report: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["method", "metric", "value"])
    for method, metric, value in flatten_report(report):
        writer.writerow([method, metric, value])
    return buffer.getvalue()


def emit_report(report: dict, path, fmt: str = "json") -> None:
    """Write a report to ``path`` as canonical JSON or flattened CSV."""
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")
    path = Path(path)
    text = report_to_json(report) if fmt == "json" else report_to_csv(report)
    path.write_text(text, encoding="utf-8")
