"""Command line interface.

    qexpand index <corpus> --out index.json
    qexpand expand <query> [--config FILE | --graph FILE --fixtures DIR ...]
    qexpand eval --uer voters.jsonl --systems a.json b.json [--json out.json]
    qexpand serve [--config FILE] [--listen host:port]
    qexpand fixtures record <query> --config FILE
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import AppConfig, build_state, load_config
from .corpus import build_index, read_corpus
from .engine import EngineConfig
from .errors import ExpansionError
from .pool import build_candidate_pool, normalize_query
from .ranking import (
    aggregate_uer,
    compare_report,
    load_voter_rankings,
    rank_candidates,
)


def _add_source_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="config file (key = value lines)")
    parser.add_argument("--graph", type=Path, help="lexical graph file")
    parser.add_argument("--corpus", type=Path, help="corpus directory or TSV file")
    parser.add_argument("--index", type=Path, help="prebuilt corpus index")
    parser.add_argument("--pool", type=Path, default=Path("pool.jsonl"), help="query pool file")
    parser.add_argument("--fixtures", type=Path, help="engine fixture directory")
    parser.add_argument(
        "--provider",
        choices=["replay", "live", "live-with-cache"],
        default="replay",
        help="engine mode when --fixtures or --endpoint is given",
    )
    parser.add_argument("--endpoint", help="live engine endpoint URL")
    parser.add_argument("--rho", type=float, help="blend weight for the distance")
    parser.add_argument("--h-prime", type=float, dest="h_prime", help="co-occurrence threshold")
    parser.add_argument("--r-threshold", type=float, dest="r_threshold", help="reliability cutoff")
    parser.add_argument("--max-depth", type=int, dest="max_depth", help="graph traversal depth")
    parser.add_argument("--max-candidates", type=int, dest="max_candidates")


def _config_from_args(args: argparse.Namespace) -> AppConfig:
    if args.config:
        config = load_config(args.config)
    else:
        engine = None
        if args.fixtures or args.endpoint:
            engine = EngineConfig(
                mode=args.provider,
                endpoint=args.endpoint or "",
                fixtures_dir=args.fixtures or Path("fixtures"),
            )
        config = AppConfig(
            corpus=args.corpus,
            index=args.index,
            graph=args.graph,
            pool=args.pool,
            engine=engine,
        )
        return _apply_overrides(args, config)
    # flag overrides on top of the config file
    for attr in ("graph", "corpus", "index"):
        if getattr(args, attr, None):
            setattr(config, attr, getattr(args, attr))
    if getattr(args, "pool", None) and args.pool != Path("pool.jsonl"):
        config.pool = args.pool
    return _apply_overrides(args, config)


def _apply_overrides(args: argparse.Namespace, config: AppConfig) -> AppConfig:
    for attr in ("rho", "h_prime", "r_threshold", "max_depth", "max_candidates"):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(config, attr, value)
    return config


def cmd_index(args: argparse.Namespace) -> int:
    docs = read_corpus(args.corpus)
    index = build_index(docs)
    index.save(args.out)
    print(f"indexed {index.m} documents, {len(index.vocabulary())} terms -> {args.out}")
    return 0


def cmd_expand(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    state = build_state(config)
    key = normalize_query(args.query)
    entry, exact = state.pool.match(key)
    seed = entry.key
    candidates = build_candidate_pool(
        seed,
        entry=entry,
        graph=state.graph,
        engine=state.client,
        index=state.index,
        policy=config.policy(),
        limits=config.limits(),
        h_prime=config.h_prime,
    )
    ranked = rank_candidates(seed, candidates, state.counts, rho=config.rho)
    if args.limit is not None:
        ranked = ranked[: max(args.limit, 0)]
    if args.json:
        body = {
            "matched_query": seed.canonical,
            "exact": exact,
            "candidates": [
                {
                    "term": c.term,
                    "distance": c.distance,
                    "source": c.source.value,
                    "expanded_query": f"{seed.canonical} {c.term}",
                }
                for c in ranked
            ],
        }
        print(json.dumps(body, ensure_ascii=False, sort_keys=True))
        return 0
    marker = "exact" if exact else "nearest match"
    print(f"matched query: {seed.canonical} ({marker})")
    width = max([len("term")] + [len(c.term) for c in ranked])
    print(f"{'rank':<5} {'term':<{width}} {'distance':<9} {'source':<17} expanded query")
    for rank, c in enumerate(ranked, start=1):
        print(
            f"{rank:<5} {c.term:<{width}} {c.distance:<9.4f} {c.source.value:<17} "
            f"{seed.canonical} {c.term}"
        )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    votes = load_voter_rankings(args.uer)
    uer = aggregate_uer(votes)
    systems: dict[str, list[str]] = {}
    for path in args.systems:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(payload, list):
            name, order = Path(path).stem, payload
        else:
            name, order = payload.get("name", Path(path).stem), payload["order"]
        systems[str(name)] = [str(t) for t in order]
    report = compare_report(uer, systems)
    sys.stdout.write(report.render_text())
    if args.json:
        Path(args.json).write_text(
            json.dumps(report.to_records(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    config = _config_from_args(args)
    if args.ui:
        config.ui = args.ui
    if args.listen:
        config.listen = args.listen
    state = build_state(config)
    host, _, port = config.listen.rpartition(":")
    uvicorn.run(create_app(state), host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_fixtures_record(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.engine is None:
        print("fixtures record needs engine settings (endpoint, mode live)", file=sys.stderr)
        return 1
    config.engine.mode = "live-with-cache"
    state = build_state(config)
    assert state.client is not None
    key = normalize_query(args.query)
    entry, _ = state.pool.match(key)
    seed = entry.key
    candidates = build_candidate_pool(
        seed,
        entry=entry,
        graph=state.graph,
        engine=state.client,
        index=state.index,
        policy=config.policy(),
        limits=config.limits(),
        h_prime=config.h_prime,
    )
    seed_terms = list(seed.tokens)
    recorded = 1
    state.client.fetch_count(seed_terms)
    for term, _source in candidates:
        state.client.fetch_count([term])
        state.client.fetch_count(seed_terms + [term])
        recorded += 2
    print(
        f"recorded {recorded} hit counts and 1 suggestion list for {seed.canonical!r} "
        f"into {state.client.config.fixtures_dir}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qexpand", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    p_index = sub.add_parser("index", help="build and persist a corpus index")
    p_index.add_argument("corpus", type=Path)
    p_index.add_argument("--out", type=Path, default=Path("index.json"))
    p_index.set_defaults(func=cmd_index)

    p_expand = sub.add_parser("expand", help="print the ranked expansion table")
    p_expand.add_argument("query")
    _add_source_flags(p_expand)
    p_expand.add_argument("--limit", type=int, help="cap the printed candidate list")
    p_expand.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p_expand.set_defaults(func=cmd_expand)

    p_eval = sub.add_parser("eval", help="compare system rankings against voter ground truth")
    p_eval.add_argument("--uer", type=Path, required=True, help="voter rankings, one JSON per line")
    p_eval.add_argument("--systems", type=Path, nargs="+", required=True)
    p_eval.add_argument("--json", type=Path, help="also write machine-readable records here")
    p_eval.set_defaults(func=cmd_eval)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    _add_source_flags(p_serve)
    p_serve.add_argument("--listen", help="host:port")
    p_serve.add_argument("--ui", type=Path, help="static UI directory to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    p_fixtures = sub.add_parser("fixtures", help="fixture management")
    fixtures_sub = p_fixtures.add_subparsers(dest="fixtures_command")
    p_record = fixtures_sub.add_parser("record", help="capture live counts for later replay")
    p_record.add_argument("query")
    _add_source_flags(p_record)
    p_record.set_defaults(func=cmd_fixtures_record)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except ExpansionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
