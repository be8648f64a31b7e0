import json

import numpy as np
import pytest

from uptok import CorpusEntry, QueryRecord


def make_entries(n: int, dim: int = 8, seed: int = 0) -> list[CorpusEntry]:
    rng = np.random.default_rng(seed)
    return [
        CorpusEntry(
            id=f"e{i:04d}",
            modality="image" if i % 2 == 0 else "text",
            embedding=rng.normal(size=dim),
            payload_ref=f"payload {i}",
        )
        for i in range(n)
    ]


def build_world(
    seed: int = 0,
    n_entries: int = 1000,
    n_queries: int = 100,
    dim: int = 32,
    relevant_per_query: int = 8,
    cos_band: tuple[float, float] = (0.36, 0.48),
):
    """Synthetic retrieval world where stage-1 cosine is informative but noisy.

    Each query gets its own direction; its relevant entries are planted at
    cosines drawn from ``cos_band`` around that direction, a band chosen to
    straddle the top of the random-cosine distribution. A cosine scan then
    tends to surface some relevant entries without packing the very top
    ranks, so deeper shortlists capture strictly more of them. Remaining
    entries are random unit vectors. Returns (entries, queries,
    relevance_map keyed by query text).
    """
    if n_queries * relevant_per_query > n_entries:
        raise ValueError("not enough entries for the requested relevant slots")
    rng = np.random.default_rng(seed)
    slots = rng.permutation(n_entries)
    vecs = rng.normal(size=(n_entries, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)

    queries = []
    relevant_ids_per_query = []
    for qi in range(n_queries):
        direction = rng.normal(size=dim)
        direction /= np.linalg.norm(direction)
        own = slots[qi * relevant_per_query : (qi + 1) * relevant_per_query]
        for idx in own:
            target_cos = rng.uniform(*cos_band)
            residual = rng.normal(size=dim)
            residual -= residual.dot(direction) * direction
            residual /= np.linalg.norm(residual)
            vecs[idx] = target_cos * direction + np.sqrt(1 - target_cos**2) * residual
        ids = frozenset(f"e{i:04d}" for i in own)
        relevant_ids_per_query.append(ids)
        queries.append(
            QueryRecord(
                query_id=f"q{qi:03d}",
                text=f"synthetic query {qi}",
                embedding=direction,
                relevant_ids=ids,
            )
        )

    entries = [
        CorpusEntry(
            id=f"e{i:04d}",
            modality="image" if i % 2 == 0 else "text",
            embedding=vecs[i],
            payload_ref=f"payload {i}",
        )
        for i in range(n_entries)
    ]
    relevance = {q.text: set(q.relevant_ids) for q in queries}
    return entries, queries, relevance


def write_corpus_file(path, entries) -> None:
    with open(path, "w") as handle:
        for entry in entries:
            handle.write(
                json.dumps(
                    {
                        "id": entry.id,
                        "modality": entry.modality,
                        "embedding": np.asarray(entry.embedding).tolist(),
                        "payload_ref": entry.payload_ref,
                    }
                )
                + "\n"
            )


def write_queries_file(path, queries) -> None:
    with open(path, "w") as handle:
        for query in queries:
            record = {"query_id": query.query_id, "text": query.text}
            if query.embedding is not None:
                record["embedding"] = np.asarray(query.embedding).tolist()
            if query.relevant_ids is not None:
                record["relevant_ids"] = sorted(query.relevant_ids)
            handle.write(json.dumps(record) + "\n")


@pytest.fixture
def small_entries() -> list[CorpusEntry]:
    return make_entries(12, dim=8, seed=3)
