"""Networked occurrence source: search-engine result counts and suggestions.

The client is engine-agnostic: the endpoint, auth header name, query
parameter, and two response-path expressions (result count, suggestions
array) all come from configuration. Every count obtained live is written
to an append-only fixture file so experiments can later be replayed
offline and deterministically.

Response paths are dotted: `webPages.totalEstimatedMatches` walks objects,
a numeric segment indexes a list, and a segment ending in `[]` maps the
rest of the path over a list, e.g. `suggestionGroups.0.searchSuggestions[].displayText`.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable

import requests

from .corpus import tokenize
from .errors import ConfigError, DomainError, FixtureMissError, TransportError

logger = logging.getLogger(__name__)

MODES = ("live", "replay", "live-with-cache")

HITS_FILE = "hits.jsonl"
SUGGESTIONS_FILE = "suggestions.jsonl"


@dataclass
class EngineConfig:
    endpoint: str = ""
    suggest_endpoint: str = ""  # falls back to endpoint when blank
    api_key: str = ""
    auth_header: str = "X-Api-Key"
    query_param: str = "q"
    mode: str = "replay"
    m_estimate: int = 10_000_000_000
    rate_limit: float = 5.0  # max requests per second; <= 0 disables throttling
    timeout: float = 10.0
    count_path: str = "count"
    suggestions_path: str = "suggestions"
    fixtures_dir: str | Path = "fixtures"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"engine mode must be one of {MODES}, got {self.mode!r}")
        if self.m_estimate < 1:
            raise ConfigError(f"m_estimate must be positive, got {self.m_estimate}")


@dataclass(frozen=True)
class HitFixture:
    key: str
    count: int
    fetched_at: str


def _normalize_term(term: str) -> str:
    return " ".join(str(term).lower().split())


def canonical_key(terms: Iterable[str]) -> str:
    """Canonical cache key: sorted, double-quoted, AND-joined terms."""
    normalized = sorted({_normalize_term(t) for t in terms if _normalize_term(t)})
    if not normalized:
        raise DomainError("term set must contain at least one non-empty term")
    return " AND ".join(f'"{t}"' for t in normalized)


def extract_path(payload: Any, path: str) -> Any:
    """Resolve a dotted response path against parsed JSON."""

    def walk(node: Any, parts: list[str]) -> Any:
        if not parts:
            return node
        head, rest = parts[0], parts[1:]
        if head.endswith("[]"):
            name = head[:-2]
            seq = node[name] if name else node
            if not isinstance(seq, list):
                raise TypeError(f"segment {head!r} did not address a list")
            return [walk(item, rest) for item in seq]
        if isinstance(node, list):
            return walk(node[int(head)], rest)
        return walk(node[head], rest)

    try:
        return walk(payload, [p for p in path.split(".") if p])
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise TransportError(f"response path {path!r} not found in engine reply: {exc}") from exc


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class FixtureStore:
    """Append-only JSONL fixtures; the last entry for a key wins.

    Pair counts are validated against the single-term counts present in
    the same store: live engines routinely report f(x AND y) above
    min(f(x), f(y)), which the measures cannot accept, so violations are
    clamped at load with a warning.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.hits: dict[str, int] = {}
        self.suggestions: dict[str, list[str]] = {}
        self._load()

    def _load(self) -> None:
        hits_path = self.root / HITS_FILE
        if hits_path.exists():
            for lineno, line in enumerate(hits_path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    self.hits[str(rec["key"])] = int(rec["count"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ConfigError(f"{hits_path}: line {lineno}: bad hit fixture: {exc}") from exc
        sugg_path = self.root / SUGGESTIONS_FILE
        if sugg_path.exists():
            for lineno, line in enumerate(sugg_path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    self.suggestions[str(rec["seed"])] = [str(s) for s in rec["suggestions"]]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ConfigError(
                        f"{sugg_path}: line {lineno}: bad suggestions fixture: {exc}"
                    ) from exc
        self._clamp_pairs()

    def _clamp_pairs(self) -> None:
        for key, count in list(self.hits.items()):
            if " AND " not in key:
                continue
            parts = key.split(" AND ")
            singles = [self.hits[p] for p in parts if p in self.hits]
            if singles and count > min(singles):
                cap = min(singles)
                logger.warning(
                    "fixture %s reports %d joint hits, above a member count; clamping to %d",
                    key, count, cap,
                )
                self.hits[key] = cap

    def _append(self, filename: str, record: dict) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        with (self.root / filename).open("a", encoding="utf-8") as fp:
            fp.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    def record_hit(self, key: str, count: int) -> None:
        self.hits[key] = count
        self._append(HITS_FILE, {"key": key, "count": count, "fetched_at": _now()})

    def record_suggestions(self, seed: str, suggestions: list[str]) -> None:
        self.suggestions[seed] = list(suggestions)
        self._append(
            SUGGESTIONS_FILE,
            {"seed": seed, "suggestions": list(suggestions), "fetched_at": _now()},
        )


def _http_get_json(url: str, params: dict, headers: dict, timeout: float) -> Any:
    try:
        response = requests.get(url, params=params, headers=headers, timeout=timeout)
        response.raise_for_status()
        return response.json()
    except requests.RequestException as exc:
        raise TransportError(f"engine request to {url} failed: {exc}") from exc


Transport = Callable[[str, dict, dict, float], Any]


class SearchClient:
    """Shareable across threads; the rate limiter and cache writer serialize
    internally. Replay mode never touches the network."""

    def __init__(self, config: EngineConfig, transport: Transport | None = None):
        self.config = config
        self.fixtures = FixtureStore(config.fixtures_dir)
        self._transport = transport or _http_get_json
        self._lock = threading.Lock()
        self._next_slot = 0.0
        self.requests_made = 0

    # -- plumbing ---------------------------------------------------------

    def _headers(self) -> dict:
        if self.config.api_key and self.config.auth_header:
            return {self.config.auth_header: self.config.api_key}
        return {}

    def _request(self, url: str, query: str) -> Any:
        if not url:
            raise ConfigError("engine endpoint is not configured")
        with self._lock:
            if self.config.rate_limit > 0:
                interval = 1.0 / self.config.rate_limit
                now = time.monotonic()
                wait = self._next_slot - now
                if wait > 0:
                    time.sleep(wait)
                    now = time.monotonic()
                self._next_slot = max(now, self._next_slot) + interval
            self.requests_made += 1
            return self._transport(
                url, {self.config.query_param: query}, self._headers(), self.config.timeout
            )

    def _check_m(self, key: str, count: int) -> int:
        if count > self.config.m_estimate:
            raise ConfigError(
                f"m_estimate={self.config.m_estimate} is below the observed count "
                f"{count} for {key}; raise it"
            )
        return count

    # -- operations -------------------------------------------------------

    def fetch_count(self, terms: Iterable[str]) -> int:
        """Result count for the AND-conjunction of the given terms."""
        key = canonical_key(terms)
        mode = self.config.mode
        if mode == "replay":
            if key not in self.fixtures.hits:
                raise FixtureMissError(f"no hit fixture for key {key}")
            return self._check_m(key, self.fixtures.hits[key])
        if mode == "live-with-cache" and key in self.fixtures.hits:
            return self._check_m(key, self.fixtures.hits[key])
        payload = self._request(self.config.endpoint, key)
        count = int(extract_path(payload, self.config.count_path))
        if count < 0:
            raise TransportError(f"engine reported a negative count for {key}")
        self.fixtures.record_hit(key, count)
        return self._check_m(key, count)

    def fetch_suggestions(self, seed: str, limit: int) -> list[str]:
        """Up to `limit` engine completions for the seed, seed tokens stripped.

        Raw engine suggestions are cached; stripping happens on read so
        live and replay agree.
        """
        norm_seed = _normalize_term(seed)
        if not norm_seed:
            raise DomainError("seed must be non-empty")
        if limit <= 0:
            return []
        raw = self._raw_suggestions(norm_seed)
        seed_tokens = set(tokenize(norm_seed))
        out: list[str] = []
        for suggestion in raw:
            kept = [t for t in tokenize(suggestion) if t not in seed_tokens]
            candidate = " ".join(kept)
            if not candidate or candidate in out:
                continue
            out.append(candidate)
            if len(out) >= limit:
                break
        return out

    def _raw_suggestions(self, norm_seed: str) -> list[str]:
        mode = self.config.mode
        if mode == "replay":
            if norm_seed not in self.fixtures.suggestions:
                raise FixtureMissError(f"no suggestions fixture for seed {norm_seed!r}")
            return self.fixtures.suggestions[norm_seed]
        if mode == "live-with-cache" and norm_seed in self.fixtures.suggestions:
            return self.fixtures.suggestions[norm_seed]
        url = self.config.suggest_endpoint or self.config.endpoint
        payload = self._request(url, norm_seed)
        raw = extract_path(payload, self.config.suggestions_path)
        if not isinstance(raw, list):
            raise TransportError(
                f"suggestions path {self.config.suggestions_path!r} did not yield a list"
            )
        suggestions = [str(s) for s in raw]
        self.fixtures.record_suggestions(norm_seed, suggestions)
        return suggestions
