"""Application configuration and service state assembly.

Config files are plain `key = value` lines with `#` comments. Engine
settings use dotted keys (`engine.mode`, `engine.endpoint`, ...). The
ENGINE_API_KEY environment variable overrides the configured api key.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import CorpusIndex, build_index, read_corpus
from .engine import EngineConfig, SearchClient
from .errors import ConfigError
from .lexgraph import ExpansionPolicy, LexicalGraph, load_graph
from .measures import DEFAULT_RHO
from .pool import DEFAULT_H_PRIME, PoolLimits, QueryPool

_ENGINE_KEYS = {
    "endpoint": str,
    "suggest_endpoint": str,
    "api_key": str,
    "auth_header": str,
    "query_param": str,
    "mode": str,
    "m_estimate": int,
    "rate_limit": float,
    "timeout": float,
    "count_path": str,
    "suggestions_path": str,
    "fixtures_dir": str,
}

_TOP_KEYS = {
    "corpus": str,
    "index": str,
    "graph": str,
    "pool": str,
    "ui": str,
    "listen": str,
    "counts": str,
    "rho": float,
    "h_prime": float,
    "r_threshold": float,
    "max_candidates": int,
    "max_depth": int,
    "suggestion_limit": int,
}


@dataclass
class AppConfig:
    corpus: Path | None = None
    index: Path | None = None
    graph: Path | None = None
    pool: Path = Path("pool.jsonl")
    ui: Path | None = None
    engine: EngineConfig | None = None
    counts: str = "auto"  # auto | engine | corpus
    rho: float = DEFAULT_RHO
    h_prime: float = DEFAULT_H_PRIME
    r_threshold: float = 0.0
    max_candidates: int = 25
    max_depth: int = 2
    suggestion_limit: int = 10
    listen: str = "127.0.0.1:8765"

    def __post_init__(self):
        if self.corpus is None and self.index is None and self.engine is None:
            raise ConfigError(
                "no occurrence source configured: set corpus, index, or engine.* settings"
            )
        if self.counts not in ("auto", "engine", "corpus"):
            raise ConfigError(f"counts must be auto, engine or corpus, got {self.counts!r}")

    def policy(self) -> ExpansionPolicy:
        return ExpansionPolicy(max_depth=self.max_depth, r_threshold=self.r_threshold)

    def limits(self) -> PoolLimits:
        return PoolLimits(max_candidates=self.max_candidates, suggestions=self.suggestion_limit)


def _parse_kv(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
        key, value = stripped.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    raw = _parse_kv(path)
    top: dict = {}
    engine_kwargs: dict = {}
    for key, value in raw.items():
        if key.startswith("engine."):
            name = key[len("engine."):]
            caster = _ENGINE_KEYS.get(name)
            if caster is None:
                raise ConfigError(f"{path}: unknown engine setting {name!r}")
            engine_kwargs[name] = caster(value)
        else:
            caster = _TOP_KEYS.get(key)
            if caster is None:
                raise ConfigError(f"{path}: unknown setting {key!r}")
            top[key] = caster(value)
    for pathy in ("corpus", "index", "graph", "pool", "ui"):
        if pathy in top:
            candidate = Path(top[pathy])
            if not candidate.is_absolute():
                candidate = path.parent / candidate
            top[pathy] = candidate
    engine = None
    if engine_kwargs:
        if "fixtures_dir" in engine_kwargs:
            fx = Path(engine_kwargs["fixtures_dir"])
            if not fx.is_absolute():
                fx = path.parent / fx
            engine_kwargs["fixtures_dir"] = fx
        engine = EngineConfig(**engine_kwargs)
    config = AppConfig(engine=engine, **top)
    key_override = os.environ.get("ENGINE_API_KEY")
    if key_override and config.engine is not None:
        config.engine.api_key = key_override
    return config


@dataclass
class AppState:
    """Everything the API and CLI need, built once from an AppConfig."""

    config: AppConfig
    pool: QueryPool
    graph: LexicalGraph | None = None
    index: CorpusIndex | None = None
    client: SearchClient | None = None
    counts: object = field(init=False, default=None)

    def __post_init__(self):
        from .counts import CorpusCounts, EngineCounts

        want = self.config.counts
        if want == "engine" and self.client is None:
            raise ConfigError("counts = engine but no engine is configured")
        if want == "corpus" and self.index is None:
            raise ConfigError("counts = corpus but no corpus or index is configured")
        if want == "engine" or (want == "auto" and self.client is not None):
            self.counts = EngineCounts(self.client)
        elif self.index is not None:
            self.counts = CorpusCounts(self.index)
        else:
            raise ConfigError("no occurrence source available for ranking")


def build_state(config: AppConfig, transport=None) -> AppState:
    index = None
    if config.index is not None:
        index = CorpusIndex.load(config.index)
    elif config.corpus is not None:
        index = build_index(read_corpus(config.corpus))
    graph = load_graph(config.graph) if config.graph is not None else None
    client = SearchClient(config.engine, transport=transport) if config.engine is not None else None
    pool = QueryPool(config.pool)
    return AppState(config=config, pool=pool, graph=graph, index=index, client=client)
