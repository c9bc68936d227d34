"""Occurrence-count sources the ranker can score against.

A count source answers document counts for AND-conjunctions of terms plus
the total collection size. The corpus adapter is exact; the engine adapter
reports engine hit counts with the configured total estimate.
"""

from __future__ import annotations

from typing import Protocol, Sequence

from .corpus import CorpusIndex
from .engine import SearchClient


class CountSource(Protocol):
    def count(self, terms: Sequence[str]) -> int: ...

    def total(self) -> int: ...


class CorpusCounts:
    def __init__(self, index: CorpusIndex):
        self.index = index

    def count(self, terms: Sequence[str]) -> int:
        return len(self.index.matching(terms))

    def total(self) -> int:
        return self.index.m


class EngineCounts:
    def __init__(self, client: SearchClient):
        self.client = client

    def count(self, terms: Sequence[str]) -> int:
        return self.client.fetch_count(terms)

    def total(self) -> int:
        return self.client.config.m_estimate
