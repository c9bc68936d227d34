"""HTTP/JSON API consumed by the web UI.

POST /api/expand  {query, source_filter?, limit?} -> matched query, exact
flag, and candidates sorted ascending by distance.
POST /api/choose  {query, term} -> updated pool entry snapshot.
GET  /api/pool    -> every pool entry.
GET  /api/health  -> configured sources.

Expansion errors map onto status classes: bad input 400, empty pool 404,
engine outage 502.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import AppState
from .errors import (
    DomainError,
    FixtureMissError,
    PoolEmptyError,
    RankingEmptyError,
    TransportError,
)
from .pool import build_candidate_pool, normalize_query
from .ranking import RankedCandidate, rank_candidates


class ExpandRequest(BaseModel):
    query: str
    source_filter: list[str] | None = None
    limit: int | None = None


class ChooseRequest(BaseModel):
    query: str
    term: str


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _candidate_body(c: RankedCandidate, seed_canonical: str) -> dict:
    return {
        "term": c.term,
        "distance": c.distance,
        "source": c.source.value,
        "components": {"pmi": _finite(c.pmi), "ngd": _finite(c.ngd)},
        "expanded_query": f"{seed_canonical} {c.term}",
    }


def _entry_body(entry) -> dict:
    return entry.to_record()


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="qexpand")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(DomainError)
    async def _domain_error(request: Request, exc: DomainError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(PoolEmptyError)
    async def _pool_empty(request: Request, exc: PoolEmptyError):
        status = 502 if exc.transient else 404
        return JSONResponse(
            status_code=status, content={"error": str(exc), "causes": exc.causes}
        )

    @app.exception_handler(RankingEmptyError)
    async def _ranking_empty(request: Request, exc: RankingEmptyError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(TransportError)
    async def _transport(request: Request, exc: TransportError):
        return JSONResponse(status_code=502, content={"error": str(exc)})

    @app.exception_handler(FixtureMissError)
    async def _fixture_miss(request: Request, exc: FixtureMissError):
        return JSONResponse(status_code=502, content={"error": str(exc)})

    @app.post("/api/expand")
    def expand(req: ExpandRequest) -> dict:
        key = normalize_query(req.query)
        entry, exact = state.pool.match(key)
        seed = entry.key
        cfg = state.config
        candidates = build_candidate_pool(
            seed,
            entry=entry,
            graph=state.graph,
            engine=state.client,
            index=state.index,
            policy=cfg.policy(),
            limits=cfg.limits(),
            h_prime=cfg.h_prime,
        )
        if req.source_filter is not None:
            wanted = set(req.source_filter)
            candidates = [c for c in candidates if c[1].value in wanted]
            if not candidates:
                raise PoolEmptyError({"source_filter": "filter excluded every candidate"})
        ranked = rank_candidates(seed, candidates, state.counts, rho=cfg.rho)
        if req.limit is not None:
            ranked = ranked[: max(req.limit, 0)]
        return {
            "matched_query": seed.canonical,
            "exact": exact,
            "candidates": [_candidate_body(c, seed.canonical) for c in ranked],
        }

    @app.post("/api/choose")
    def choose(req: ChooseRequest) -> dict:
        key = normalize_query(req.query)
        state.pool.match(key)  # auto-create the entry for never-seen queries
        entry = state.pool.record_choice(key, req.term)
        return _entry_body(entry)

    @app.get("/api/pool")
    def pool_listing() -> dict:
        entries = [
            _entry_body(state.pool.entries[c]) for c in sorted(state.pool.entries)
        ]
        return {"entries": entries}

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "sources": {
                "graph": state.graph is not None,
                "corpus": state.index is not None,
                "engine": state.client.config.mode if state.client is not None else None,
            },
        }

    if state.config.ui is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=state.config.ui, html=True), name="ui")

    return app
