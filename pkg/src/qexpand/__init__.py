"""Query expansion engine.

Generates expansion candidates for a seed query from a lexical graph, a
document corpus, and search-engine suggestions; ranks them by a blended
co-occurrence distance computed from document hit counts; and learns from
user choices through an evolutionary query pool.
"""

from .errors import (
    ConfigError,
    DomainError,
    ExpansionError,
    FixtureMissError,
    GraphError,
    PoolEmptyError,
    RankingEmptyError,
    TransportError,
)
from .measures import ContextNorms, HitCounts, context_norms, ngd, pmi, pming

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContextNorms",
    "DomainError",
    "ExpansionError",
    "FixtureMissError",
    "GraphError",
    "HitCounts",
    "PoolEmptyError",
    "RankingEmptyError",
    "TransportError",
    "context_norms",
    "ngd",
    "pmi",
    "pming",
    "__version__",
]
