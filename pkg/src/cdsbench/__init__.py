"""Benchmarking toolkit for clinical-literature search.

Faceted BM25 retrieval, query preprocessing (negation removal, demographic
normalization, concept extraction), query expansion, facet-weight hill
climbing, a pairwise linear re-ranker and TREC-style exact and inferred
evaluation, all driven from a small declarative pipeline config.
"""

from cdsbench.errors import BuildError, CdsBenchError, ConfigError, EvaluationError, FormatError

__version__ = "0.1.0"

__all__ = [
    "BuildError",
    "CdsBenchError",
    "ConfigError",
    "EvaluationError",
    "FormatError",
    "__version__",
]
