"""Line-delimited JSON loaders with per-line validation.

Every loader reports the offending line number on malformed input, because
"something in this 2000-line file is wrong" is not an error message.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DataError
from .scorers import TableScorer
from .store import MODALITIES, CorpusEntry
from .validation import check_embedding

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalTriplet:
    """One separation-eval record: an item with a positive and a negative statement."""

    item_id: str
    payload_ref: str
    positive: str
    negative: str


@dataclass(frozen=True)
class QueryRecord:
    """One retrieval-eval query, optionally with embedding and ground truth."""

    query_id: str
    text: str
    embedding: np.ndarray | None = None
    relevant_ids: frozenset[str] | None = None


def _records(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(record, dict):
                raise DataError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, record


def _field(record: dict, name: str, path: Path, lineno: int):
    if name not in record:
        raise DataError(f"{path}: line {lineno}: missing field {name}")
    return record[name]


def load_corpus(path) -> list[CorpusEntry]:
    """Load corpus entries from line-delimited JSON.

    Each line needs ``id``, ``modality`` ("image" or "text"), ``embedding``
    (array of numbers) and ``payload_ref``. Duplicate ids are rejected with
    both line numbers.
    """
    path = Path(path)
    entries: list[CorpusEntry] = []
    first_line_of: dict[str, int] = {}
    for lineno, record in _records(path):
        entry_id = str(_field(record, "id", path, lineno))
        modality = _field(record, "modality", path, lineno)
        if modality not in MODALITIES:
            raise DataError(
                f"{path}: line {lineno}: unknown modality {modality!r} "
                f"(expected one of {MODALITIES})"
            )
        raw = _field(record, "embedding", path, lineno)
        try:
            embedding = check_embedding(raw)
        except DataError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
        payload_ref = str(_field(record, "payload_ref", path, lineno))
        if entry_id in first_line_of:
            raise DataError(
                f"{path}: line {lineno}: duplicate id {entry_id} "
                f"(first seen at line {first_line_of[entry_id]})"
            )
        first_line_of[entry_id] = lineno
        entries.append(
            CorpusEntry(
                id=entry_id,
                modality=modality,
                embedding=embedding,
                payload_ref=payload_ref,
            )
        )
    if not entries:
        raise DataError(f"{path}: empty corpus file")
    return entries


def load_triplets(path) -> list[EvalTriplet]:
    """Load eval triplets: ``item_id``, ``payload_ref``, ``positive``, ``negative``.

    A triplet whose statements coincide is kept but logged, since it can
    only drag the measured separation down, never inflate it.
    """
    path = Path(path)
    triplets: list[EvalTriplet] = []
    for lineno, record in _records(path):
        triplet = EvalTriplet(
            item_id=str(_field(record, "item_id", path, lineno)),
            payload_ref=str(_field(record, "payload_ref", path, lineno)),
            positive=str(_field(record, "positive", path, lineno)),
            negative=str(_field(record, "negative", path, lineno)),
        )
        if triplet.positive == triplet.negative:
            logger.warning(
                "%s: line %d: positive and negative statements are identical "
                "for item %s",
                path,
                lineno,
                triplet.item_id,
            )
        triplets.append(triplet)
    if not triplets:
        raise DataError(f"{path}: empty triplet file")
    return triplets


def load_queries(path) -> list[QueryRecord]:
    """Load query records: ``query_id``, ``text``, optional ``embedding``
    and optional ``relevant_ids``."""
    path = Path(path)
    queries: list[QueryRecord] = []
    for lineno, record in _records(path):
        text = str(_field(record, "text", path, lineno))
        if not text:
            raise DataError(f"{path}: line {lineno}: empty query text")
        embedding = None
        if record.get("embedding") is not None:
            try:
                embedding = check_embedding(record["embedding"])
            except DataError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from None
        relevant = record.get("relevant_ids")
        queries.append(
            QueryRecord(
                query_id=str(_field(record, "query_id", path, lineno)),
                text=text,
                embedding=embedding,
                relevant_ids=(
                    frozenset(str(x) for x in relevant)
                    if relevant is not None
                    else None
                ),
            )
        )
    if not queries:
        raise DataError(f"{path}: empty query file")
    return queries


def load_response_table(path) -> dict[str, str]:
    """Load canned responses: lines of ``query``, ``response``."""
    path = Path(path)
    responses: dict[str, str] = {}
    for lineno, record in _records(path):
        query = str(_field(record, "query", path, lineno))
        responses[query] = str(_field(record, "response", path, lineno))
    if not responses:
        raise DataError(f"{path}: empty response table")
    return responses


def load_score_table(path, name: str | None = None) -> TableScorer:
    """Load a score table: lines of ``query``, ``entry_id``, ``score`` in [0, 1]."""
    path = Path(path)
    table: dict[tuple[str, str], float] = {}
    for lineno, record in _records(path):
        query = str(_field(record, "query", path, lineno))
        entry_id = str(_field(record, "entry_id", path, lineno))
        score = _field(record, "score", path, lineno)
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise DataError(f"{path}: line {lineno}: score must be a number")
        if not 0.0 <= float(score) <= 1.0:
            raise DataError(
                f"{path}: line {lineno}: score out of range [0, 1]: {score}"
            )
        table[(query, entry_id)] = float(score)
    if not table:
        raise DataError(f"{path}: empty score table")
    return TableScorer(table, name=name or f"table:{path.name}")
