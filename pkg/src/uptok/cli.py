"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 scorer or transport
error.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .datasets import (
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
    file_digest,
    run_e2e_experiment,
    run_retrieval_experiment,
    run_separation_experiment,
)
from .analytics import CostModelParams, direct_cost_factor, rerank_cost_factor
from .reports import emit_report, report_to_csv, report_to_json
from .retriever import retrieve
from .scorers import PlantedScorer, RemoteScorer, Scorer
from .selection import SelectionPolicy
from .store import VectorStore

logger = logging.getLogger(__name__)

METHOD_NAMES = {"topk": "top_k_clip", "direct": "direct_rs", "rerank": "rerank"}

_path_arg = click.Path(exists=True, dir_okay=False, path_type=Path)


def resolve_scorer(spec: str, relevance_map=None) -> Scorer:
    """Parse a scorer spec: table:<path> | remote:<url> | planted:<seed>."""
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise click.UsageError(f"invalid scorer spec {spec!r}")
    if kind == "table":
        return load_score_table(Path(rest))
    if kind == "remote":
        return RemoteScorer(rest)
    if kind == "planted":
        try:
            seed = int(rest)
        except ValueError:
            raise click.UsageError(f"planted scorer seed must be an integer: {rest!r}")
        return PlantedScorer(seed, relevance_map)
    raise click.UsageError(
        f"unknown scorer kind {kind!r}; expected table:, remote: or planted:"
    )


def _resolve_responder(spec: str):
    if spec == "echo":
        return EchoResponder()
    kind, sep, rest = spec.partition(":")
    if kind == "table" and sep and rest:
        return TableResponder(load_response_table(Path(rest)))
    raise click.UsageError(f"unknown responder {spec!r}; expected echo or table:<path>")


def _policies(methods: str, k: int, l_values: str, tau_lo: float, tau_hi: float):
    try:
        sizes = [int(part) for part in l_values.split(",") if part.strip()]
    except ValueError:
        raise click.UsageError(f"invalid l list {l_values!r}")
    policies = []
    try:
        for name in (part.strip() for part in methods.split(",")):
            if not name:
                continue
            if name not in METHOD_NAMES:
                raise click.UsageError(
                    f"unknown method {name!r}; expected topk, direct or rerank"
                )
            if name == "rerank":
                for l in sizes:
                    policies.append(
                        SelectionPolicy("rerank", k=k, l=l, tau_lo=tau_lo, tau_hi=tau_hi)
                    )
            else:
                policies.append(
                    SelectionPolicy(METHOD_NAMES[name], k=k, tau_lo=tau_lo, tau_hi=tau_hi)
                )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if not policies:
        raise click.UsageError("no methods selected")
    return policies


def _emit(report: dict, out: Path | None, fmt: str) -> None:
    if out is None:
        text = report_to_json(report) if fmt == "json" else report_to_csv(report)
        click.echo(text, nl=False)
    else:
        emit_report(report, out, fmt)
        click.echo(f"wrote {out}", err=True)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def cli(verbose: bool):
    """Two-stage retrieval with relevancy re-ranking and up-to-k selection."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@cli.command()
@click.option("--corpus", required=True, type=_path_arg, help="Corpus file (LDJSON).")
def ingest(corpus: Path):
    """Validate a corpus file and print a summary."""
    entries = load_corpus(corpus)
    store = VectorStore.ingest(entries)
    modalities: dict[str, int] = {}
    for entry in entries:
        modalities[entry.modality] = modalities.get(entry.modality, 0) + 1
    click.echo(
        json.dumps(
            {
                "entries": len(store),
                "dim": store.dim,
                "modalities": modalities,
                "digest": file_digest(corpus),
            },
            sort_keys=True,
        )
    )


@cli.command("retrieve")
@click.option("--corpus", required=True, type=_path_arg)
@click.option("--query", required=True, help="Query text.")
@click.option(
    "--method",
    type=click.Choice(sorted(METHOD_NAMES)),
    default="rerank",
    show_default=True,
)
@click.option("--k", default=5, show_default=True)
@click.option("--l", "l", default=20, show_default=True)
@click.option("--tau-lo", default=0.3, show_default=True)
@click.option("--tau-hi", default=0.75, show_default=True)
@click.option("--scorer", "scorer_spec", help="table:<path> | remote:<url> | planted:<seed>.")
@click.option(
    "--query-embedding",
    "query_embedding_json",
    help="Query embedding as a JSON array; required for topk/rerank unless the scorer is remote.",
)
def retrieve_cmd(
    corpus: Path,
    query: str,
    method: str,
    k: int,
    l: int,
    tau_lo: float,
    tau_hi: float,
    scorer_spec: str | None,
    query_embedding_json: str | None,
):
    """Run a single query against a corpus and print the selection."""
    entries = load_corpus(corpus)
    store = VectorStore.ingest(entries)
    try:
        policy = SelectionPolicy(
            METHOD_NAMES[method], k=k, l=l, tau_lo=tau_lo, tau_hi=tau_hi
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))

    scorer = None
    if policy.method != "top_k_clip":
        if not scorer_spec:
            raise click.UsageError(f"method {method!r} requires --scorer")
        scorer = resolve_scorer(scorer_spec)

    embedding = None
    if query_embedding_json is not None:
        try:
            embedding = json.loads(query_embedding_json)
        except json.JSONDecodeError:
            raise click.UsageError("--query-embedding must be a JSON array")
    if embedding is None and policy.method != "direct_rs":
        if isinstance(scorer, RemoteScorer):
            embedding = scorer.embed([("query", "text", query)])[0]
        else:
            raise click.UsageError(
                f"method {method!r} needs --query-embedding (or a remote scorer "
                "able to embed the query)"
            )

    selected, timing = retrieve(store, scorer, query, embedding, policy)
    click.echo(
        json.dumps(
            {
                "query": query,
                "method": policy.label,
                "selected": [
                    {
                        "entry_id": c.entry_id,
                        "rs": c.rs,
                        "clip_score": c.clip_score,
                        "clip_rank": c.clip_rank,
                        "final_rank": c.final_rank,
                        "payload_ref": store.entry(c.entry_id).payload_ref,
                    }
                    for c in selected
                ],
                "timing": {
                    "stage1_s": timing.stage1_duration,
                    "stage2_s": timing.stage2_duration,
                    "scored_count": timing.scored_count,
                },
            },
            indent=2,
        )
    )


@cli.command("eval-scorer")
@click.option("--triplets", "triplets_path", required=True, type=_path_arg)
@click.option("--scorer", "scorer_spec", required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--bins", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
def eval_scorer(triplets_path, scorer_spec, out, fmt, bins, seed):
    """Scorer-separation experiment over an eval triplet file."""
    triplets = load_triplets(triplets_path)
    # For synthetic scorers, a triplet's positive statement is relevant to
    # its own item; nothing else is.
    relevance = {t.positive: {t.item_id} for t in triplets}
    scorer = resolve_scorer(scorer_spec, relevance_map=relevance)
    config = ExperimentConfig(seed=seed, bins=bins)
    report = run_separation_experiment(
        triplets, scorer, config, digests={"triplets": file_digest(triplets_path)}
    )
    _emit(report, out, fmt)


@cli.command("eval-retrieval")
@click.option("--corpus", required=True, type=_path_arg)
@click.option("--queries", "queries_path", required=True, type=_path_arg)
@click.option("--scorer", "scorer_spec", required=True)
@click.option("--methods", default="topk,direct,rerank", show_default=True)
@click.option("--k", default=5, show_default=True)
@click.option("--l", "l_values", default="10,20", show_default=True)
@click.option("--tau-lo", default=0.3, show_default=True)
@click.option("--tau-hi", default=0.75, show_default=True)
@click.option("--depth", default=5, show_default=True)
@click.option("--rho", default=35.0, show_default=True, help="Cost-model slowdown factor.")
@click.option("--seed", default=0, show_default=True)
@click.option("--measure-timing", is_flag=True, help="Attach wall-clock timings (non-reproducible).")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def eval_retrieval(
    corpus,
    queries_path,
    scorer_spec,
    methods,
    k,
    l_values,
    tau_lo,
    tau_hi,
    depth,
    rho,
    seed,
    measure_timing,
    out,
    fmt,
):
    """Retrieval-quality experiment: RS by rank position for each method."""
    entries = load_corpus(corpus)
    queries = load_queries(queries_path)
    relevance = {
        q.text: set(q.relevant_ids) for q in queries if q.relevant_ids is not None
    }
    scorer = resolve_scorer(scorer_spec, relevance_map=relevance)
    policies = _policies(methods, k, l_values, tau_lo, tau_hi)
    config = ExperimentConfig(
        seed=seed, depth=depth, cost_rho=rho, measure_timing=measure_timing
    )
    report = run_retrieval_experiment(
        entries,
        queries,
        policies,
        scorer,
        config,
        digests={
            "corpus": file_digest(corpus),
            "queries": file_digest(queries_path),
        },
    )
    _emit(report, out, fmt)


@cli.command("eval-e2e")
@click.option("--corpus", required=True, type=_path_arg)
@click.option("--queries", "queries_path", required=True, type=_path_arg)
@click.option("--scorer", "scorer_spec", required=True, help="Relevancy scorer spec.")
@click.option("--cs-scorer", "cs_scorer_spec", required=True, help="Correctness scorer spec.")
@click.option("--responder", default="echo", show_default=True, help="echo | table:<path>.")
@click.option("--methods", default="topk,direct,rerank", show_default=True)
@click.option("--k", default=5, show_default=True)
@click.option("--l", "l_values", default="10,20", show_default=True)
@click.option("--tau-lo", default=0.3, show_default=True)
@click.option("--tau-hi", default=0.75, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def eval_e2e(
    corpus,
    queries_path,
    scorer_spec,
    cs_scorer_spec,
    responder,
    methods,
    k,
    l_values,
    tau_lo,
    tau_hi,
    seed,
    out,
    fmt,
):
    """End-to-end experiment: confidence of generated responses per method."""
    entries = load_corpus(corpus)
    queries = load_queries(queries_path)
    relevance = {
        q.text: set(q.relevant_ids) for q in queries if q.relevant_ids is not None
    }
    rs_scorer = resolve_scorer(scorer_spec, relevance_map=relevance)
    cs_scorer = resolve_scorer(cs_scorer_spec)
    policies = _policies(methods, k, l_values, tau_lo, tau_hi)
    config = ExperimentConfig(seed=seed)
    report = run_e2e_experiment(
        entries,
        queries,
        policies,
        rs_scorer,
        _resolve_responder(responder),
        cs_scorer,
        config,
        digests={
            "corpus": file_digest(corpus),
            "queries": file_digest(queries_path),
        },
    )
    _emit(report, out, fmt)


@cli.command("cost-model")
@click.option("--rho", default=35.0, show_default=True)
@click.option("--corpus-size", default=1281, show_default=True)
@click.option("--l", "l_values", default="10,20", show_default=True)
def cost_model(rho, corpus_size, l_values):
    """Print modeled slowdown factors for direct and re-ranked retrieval."""
    try:
        params = CostModelParams(rho=rho, corpus_size=corpus_size)
        sizes = [int(part) for part in l_values.split(",") if part.strip()]
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(
        json.dumps(
            {
                "rho": params.rho,
                "corpus_size": params.corpus_size,
                "direct_factor": direct_cost_factor(params),
                "rerank_factors": {
                    str(l): rerank_cost_factor(l, params) for l in sizes
                },
            },
            indent=2,
            sort_keys=True,
        )
    )


def main(argv=None) -> int:
    """Entry point mapping exceptions onto documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.exceptions.NoArgsIsHelpError as exc:
        exc.show()
        return 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except ScorerError as exc:
        click.echo(f"scorer error: {exc}", err=True)
        return 3
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
