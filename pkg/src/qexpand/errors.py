"""Exception types shared across the package.

The HTTP layer maps these onto status classes, so raise the most specific
one that applies.
"""

from __future__ import annotations


class ExpansionError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ExpansionError, ValueError):
    """An operation was called with values outside its domain."""


class ConfigError(ExpansionError):
    """Configuration is missing, malformed, or internally inconsistent."""


class GraphError(DomainError):
    """Lexical graph file is malformed: parse failure, cycle, or dangling id."""


class TransportError(ExpansionError):
    """A network request to the search engine failed. Retryable."""


class FixtureMissError(ExpansionError, KeyError):
    """Replay mode has no recorded fixture for the requested key."""

    def __str__(self) -> str:  # KeyError repr-quotes its args; keep the message readable
        return self.args[0] if self.args else ""


class PoolEmptyError(ExpansionError):
    """Every configured candidate source failed or produced nothing."""

    def __init__(self, causes: dict[str, str], transient: bool = False):
        self.causes = dict(causes)
        self.transient = transient
        detail = "; ".join(f"{src}: {why}" for src, why in sorted(self.causes.items()))
        super().__init__(f"candidate pool is empty ({detail})")


class RankingEmptyError(ExpansionError):
    """Every candidate was dropped while ranking."""
