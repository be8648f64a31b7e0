"""Exception types that map onto the CLI exit codes."""


class DataError(Exception):
    """Malformed or inconsistent input data: corpus files, triplets, queries,
    score tables, or embeddings that violate their invariants."""


class ScorerError(Exception):
    """Scorer failure: a missing table entry, a transport problem, or a
    protocol violation from a remote scorer service."""
