"""Query memory and candidate assembly.

The pool remembers every query it has seen and how often users picked each
expansion candidate for it; those counts only ever grow. Candidate pools
are assembled from four sources with a fixed dedup precedence: learned
choices beat the lexical graph, which beats corpus co-occurrence, which
beats raw engine suggestions.

Persistence is one JSON object per line, `{canonical, choices, created_at,
updated_at}`, written atomically and in canonical order so that a
save/load round trip is byte-identical.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING

from .corpus import CorpusIndex, tokenize
from .errors import DomainError, ExpansionError, PoolEmptyError, TransportError
from .lexgraph import ExpansionPolicy, LexicalGraph

if TYPE_CHECKING:
    from .engine import SearchClient

logger = logging.getLogger(__name__)

DEFAULT_H_PRIME = 0.3


class CandidateSource(str, Enum):
    POOL_LEARNED = "pool_learned"
    LEXICAL_GRAPH = "lexical_graph"
    COOCCURRENCE = "cooccurrence"
    ENGINE_SUGGESTION = "engine_suggestion"


# Dedup precedence, strongest first.
SOURCE_PRECEDENCE = (
    CandidateSource.POOL_LEARNED,
    CandidateSource.LEXICAL_GRAPH,
    CandidateSource.COOCCURRENCE,
    CandidateSource.ENGINE_SUGGESTION,
)


@dataclass(frozen=True)
class QueryKey:
    tokens: tuple[str, ...]

    @property
    def canonical(self) -> str:
        return " ".join(self.tokens)


def normalize_query(raw: str) -> QueryKey:
    """Lowercase and tokenize, preserving token order."""
    tokens = tuple(tokenize(raw))
    if not tokens:
        raise DomainError(f"empty query: {raw!r} contains no alphanumeric characters")
    return QueryKey(tokens=tokens)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class QueryPoolEntry:
    key: QueryKey
    choices: dict[str, int] = field(default_factory=dict)
    created_at: str = field(default_factory=_now)
    updated_at: str = field(default_factory=_now)

    def to_record(self) -> dict:
        return {
            "canonical": self.key.canonical,
            "choices": dict(sorted(self.choices.items())),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_record(cls, record: dict) -> "QueryPoolEntry":
        key = QueryKey(tokens=tuple(str(record["canonical"]).split()))
        return cls(
            key=key,
            choices={str(t): int(n) for t, n in record.get("choices", {}).items()},
            created_at=str(record["created_at"]),
            updated_at=str(record["updated_at"]),
        )


def _jaccard(a: set[str], b: set[str]) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 0.0


class QueryPool:
    """Single writer, many readers. Mutations persist before returning."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.entries: dict[str, QueryPoolEntry] = {}
        self._lock = threading.RLock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        assert self.path is not None
        for lineno, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                entry = QueryPoolEntry.from_record(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DomainError(f"{self.path}: line {lineno}: bad pool record: {exc}") from exc
            self.entries[entry.key.canonical] = entry

    def dumps(self) -> str:
        """Canonical serialization: entries sorted by key, choices by term."""
        lines = [
            json.dumps(self.entries[c].to_record(), ensure_ascii=False, sort_keys=True)
            for c in sorted(self.entries)
        ]
        return "".join(line + "\n" for line in lines)

    def save(self) -> None:
        if self.path is None:
            return
        with self._lock:
            data = self.dumps()
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=self.path.name, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fp:
                    fp.write(data)
                os.replace(tmp, self.path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise

    def get(self, canonical: str) -> QueryPoolEntry | None:
        return self.entries.get(canonical)

    def match(self, key: QueryKey) -> tuple[QueryPoolEntry, bool]:
        """Exact hit, or record the new query and return its nearest neighbour.

        Misses create a fresh entry. The nearest existing entry by
        token-set Jaccard similarity is returned when one overlaps at all;
        otherwise the fresh entry itself is, always with exact=False.
        """
        with self._lock:
            hit = self.entries.get(key.canonical)
            if hit is not None:
                return hit, True
            fresh = QueryPoolEntry(key=key)
            candidates = list(self.entries.values())
            self.entries[key.canonical] = fresh
            self.save()
            best: QueryPoolEntry | None = None
            best_score = 0.0
            for entry in candidates:
                score = _jaccard(set(key.tokens), set(entry.key.tokens))
                if score > best_score or (
                    score == best_score
                    and best is not None
                    and score > 0.0
                    and entry.key.canonical < best.key.canonical
                ):
                    best, best_score = entry, score
            if best is None or best_score == 0.0:
                return fresh, False
            return best, False

    def record_choice(self, key: QueryKey, chosen: str) -> QueryPoolEntry:
        """Increment the choice count; free-text terms outside the shown
        candidate list are recorded too."""
        term = " ".join(tokenize(chosen))
        if not term:
            raise DomainError(f"empty term: {chosen!r}")
        with self._lock:
            entry = self.entries.get(key.canonical)
            if entry is None:
                raise DomainError(f"query not in pool: {key.canonical!r}")
            entry.choices[term] = entry.choices.get(term, 0) + 1
            entry.updated_at = _now()
            self.save()
            return entry


def expand_cooccurrence(
    index: CorpusIndex,
    seed_terms: set[str],
    vocabulary: set[str],
    h_prime: float = DEFAULT_H_PRIME,
) -> list[tuple[str, float]]:
    """Vocabulary terms whose conditional probability given the seeds
    reaches the threshold, strongest first."""
    seeds = {" ".join(tokenize(t)) for t in seed_terms}
    seed_tokens = {tok for s in seeds for tok in s.split()}
    out = []
    for term in sorted(vocabulary):
        if term in seeds or term in seed_tokens:
            continue
        p = index.cond_prob(term, sorted(seeds))
        if p >= h_prime:
            out.append((term, p))
    out.sort(key=lambda pair: (-pair[1], pair[0]))
    return out


@dataclass(frozen=True)
class PoolLimits:
    max_candidates: int = 25
    suggestions: int = 10


def build_candidate_pool(
    seed: QueryKey,
    *,
    entry: QueryPoolEntry | None = None,
    graph: LexicalGraph | None = None,
    engine: "SearchClient | None" = None,
    index: CorpusIndex | None = None,
    policy: ExpansionPolicy | None = None,
    limits: PoolLimits | None = None,
    h_prime: float = DEFAULT_H_PRIME,
) -> list[tuple[str, CandidateSource]]:
    """Union of all configured sources, deduplicated by precedence.

    A failing source degrades the pool with a warning; only when nothing
    at all is produced does the call fail, carrying the per-source causes.
    """
    limits = limits or PoolLimits()
    policy = policy or ExpansionPolicy()
    if entry is None and graph is None and engine is None and index is None:
        raise PoolEmptyError({"config": "no candidate sources configured"})

    collected: list[tuple[str, CandidateSource]] = []
    causes: dict[str, str] = {}
    transient = False

    if entry is not None:
        learned = sorted(
            (term for term, n in entry.choices.items() if n >= 1),
            key=lambda t: (-entry.choices[t], t),
        )
        if learned:
            collected.extend((t, CandidateSource.POOL_LEARNED) for t in learned)
        else:
            causes["pool_learned"] = "no recorded choices"

    if graph is not None:
        try:
            words = [seed.canonical]
            if len(seed.tokens) > 1:
                words.extend(seed.tokens)
            expanded: list[str] = []
            for word in words:
                expanded.extend(e.term for e in graph.expand(word, policy))
            if expanded:
                collected.extend((t, CandidateSource.LEXICAL_GRAPH) for t in expanded)
            else:
                causes["lexical_graph"] = "seed has no senses or expansion is empty"
        except ExpansionError as exc:
            causes["lexical_graph"] = str(exc)
            logger.warning("lexical graph expansion failed: %s", exc)

    if index is not None:
        try:
            related = expand_cooccurrence(index, set(seed.tokens), index.vocabulary(), h_prime)
            if related:
                collected.extend((t, CandidateSource.COOCCURRENCE) for t, _ in related)
            else:
                causes["cooccurrence"] = "no term reached the threshold"
        except ExpansionError as exc:
            causes["cooccurrence"] = str(exc)
            logger.warning("co-occurrence expansion failed: %s", exc)

    if engine is not None:
        try:
            suggested = engine.fetch_suggestions(seed.canonical, limits.suggestions)
            if suggested:
                collected.extend((t, CandidateSource.ENGINE_SUGGESTION) for t in suggested)
            else:
                causes["engine_suggestion"] = "engine returned no suggestions"
        except ExpansionError as exc:
            causes["engine_suggestion"] = str(exc)
            transient = transient or isinstance(exc, TransportError)
            logger.warning("engine suggestions failed: %s", exc)

    rank = {source: i for i, source in enumerate(SOURCE_PRECEDENCE)}
    collected.sort(key=lambda pair: rank[pair[1]])  # stable: keeps insertion order per source
    seed_tokens = set(seed.tokens)
    seen: set[str] = set()
    out: list[tuple[str, CandidateSource]] = []
    for term, source in collected:
        norm = " ".join(tokenize(term))
        if not norm or norm in seen or norm in seed_tokens or norm == seed.canonical:
            continue
        seen.add(norm)
        out.append((norm, source))
        if len(out) >= limits.max_candidates:
            break
    if not out:
        raise PoolEmptyError(causes or {"all": "no candidates produced"}, transient=transient)
    return out
