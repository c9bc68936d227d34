"""Lexical taxonomy: sense lookup, common-subsumer distance, and
hierarchical expansion with traversal probabilities and reliability pruning.

Graph file format (UTF-8, newline-delimited, `#` starts a comment line):

    S <id> <pos> <lemma,lemma,...>
    E <parent-id> <child-id> <is_a|part_of> [t] [r]

`t` is the branch traversal probability; when absent it defaults to
1/out-degree of the parent. `r` is the subtree reliability factor; when
absent it defaults to 0.9 for is_a edges and 0.6 for part_of edges
(concrete part-whole branches are less dependable than class hierarchy).
The combined edge set must be acyclic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

from .errors import DomainError, GraphError

RELATIONS = ("is_a", "part_of")

_POS_ALIASES = {
    "n": "n", "noun": "n",
    "v": "v", "verb": "v",
    "a": "a", "adj": "a", "adjective": "a",
    "r": "r", "adv": "r", "adverb": "r",
}

_DEFAULT_R = {"is_a": 0.9, "part_of": 0.6}


def normalize_lemma(lemma: str) -> str:
    return " ".join(lemma.lower().replace("_", " ").split())


@dataclass(frozen=True)
class Synset:
    id: str
    pos: str
    lemmas: frozenset[str]
    gloss: str = ""


@dataclass(frozen=True)
class LexEdge:
    parent: str
    child: str
    relation: str
    t: float
    r: float


@dataclass(frozen=True)
class ExpansionPolicy:
    max_depth: int = 2
    direction: str = "down"  # down | up | both
    precision_target: float = 0.0
    r_threshold: float | None = None  # when None, precision_target is the cutoff
    relations: frozenset[str] = field(default_factory=lambda: frozenset(RELATIONS))

    def __post_init__(self):
        if self.max_depth < 1:
            raise DomainError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.direction not in ("down", "up", "both"):
            raise DomainError(f"direction must be down, up or both, got {self.direction!r}")
        if not 0.0 <= self.precision_target <= 1.0:
            raise DomainError(f"precision_target must lie in [0, 1], got {self.precision_target}")
        unknown = set(self.relations) - set(RELATIONS)
        if unknown:
            raise DomainError(f"unknown relations: {sorted(unknown)}")

    @property
    def cutoff(self) -> float:
        return self.precision_target if self.r_threshold is None else self.r_threshold


class ExpandedTerm(NamedTuple):
    term: str
    depth: int
    probability: float


class LexicalGraph:
    """Immutable after load; all queries are concurrent-safe."""

    def __init__(self, synsets: dict[str, Synset], edges: list[LexEdge]):
        self.synsets = synsets
        self.edges = edges
        self._children: dict[str, list[LexEdge]] = {}
        self._parents: dict[str, list[LexEdge]] = {}
        self._lemma_index: dict[str, set[str]] = {}
        for edge in edges:
            self._children.setdefault(edge.parent, []).append(edge)
            self._parents.setdefault(edge.child, []).append(edge)
        for syn in synsets.values():
            for lemma in syn.lemmas:
                self._lemma_index.setdefault(lemma, set()).add(syn.id)
        self.noun_count = sum(1 for s in synsets.values() if s.pos == "n")

    def _require(self, concept_id: str) -> Synset:
        syn = self.synsets.get(concept_id)
        if syn is None:
            raise DomainError(f"unknown concept id: {concept_id!r}")
        return syn

    def senses(self, word: str) -> set[str]:
        """Ids of every synset whose lemma set contains the word."""
        return set(self._lemma_index.get(normalize_lemma(word), ()))

    def ancestors(self, concept_id: str) -> set[str]:
        """is_a ancestors of a concept, including the concept itself."""
        self._require(concept_id)
        seen = {concept_id}
        stack = [concept_id]
        while stack:
            for edge in self._parents.get(stack.pop(), ()):
                if edge.relation == "is_a" and edge.parent not in seen:
                    seen.add(edge.parent)
                    stack.append(edge.parent)
        return seen

    def subsumers(self, c1: str, c2: str) -> set[str]:
        """Concepts subsuming both arguments (self-inclusive ancestors)."""
        return self.ancestors(c1) & self.ancestors(c2)

    def wordnet_distance(self, c1: str, c2: str) -> float:
        """Shared-subsumer count over the graph's noun synset total."""
        self._require(c1)
        self._require(c2)
        if self.noun_count == 0:
            raise DomainError("graph has no noun synsets")
        return len(self.subsumers(c1, c2)) / self.noun_count

    def _steps(self, synset_id: str, policy: ExpansionPolicy) -> Iterator[tuple[str, LexEdge]]:
        cutoff = policy.cutoff
        if policy.direction in ("down", "both"):
            for edge in self._children.get(synset_id, ()):
                if edge.relation in policy.relations and edge.r >= cutoff:
                    yield edge.child, edge
        if policy.direction in ("up", "both"):
            for edge in self._parents.get(synset_id, ()):
                if edge.relation in policy.relations and edge.r >= cutoff:
                    yield edge.parent, edge

    def expand(self, seed: str, policy: ExpansionPolicy) -> list[ExpandedTerm]:
        """Breadth-limited traversal from every sense of the seed.

        Subtrees entered through an edge below the reliability cutoff are
        pruned whole. Each emitted term carries its minimal depth and the
        maximal product of branch probabilities over all admissible paths;
        the seed word itself is never emitted. Unknown seeds yield [].
        """
        seed_word = normalize_lemma(seed)
        start = self.senses(seed_word)
        if not start:
            return []
        # (min depth, max path probability) per visited synset. Per-level
        # max-product propagation is exact because t <= 1 only shrinks.
        best: dict[str, tuple[int, float]] = {sid: (0, 1.0) for sid in start}
        current: dict[str, float] = {sid: 1.0 for sid in start}
        for depth in range(1, policy.max_depth + 1):
            nxt: dict[str, float] = {}
            for sid, prob in current.items():
                for target, edge in self._steps(sid, policy):
                    p = prob * edge.t
                    if p > nxt.get(target, -1.0):
                        nxt[target] = p
            for sid, p in nxt.items():
                d0, p0 = best.get(sid, (depth, 0.0))
                best[sid] = (min(d0, depth), max(p0, p))
            current = nxt
        terms: dict[str, tuple[int, float]] = {}
        for sid, (depth, prob) in best.items():
            for lemma in self.synsets[sid].lemmas:
                if lemma == seed_word:
                    continue
                d0, p0 = terms.get(lemma, (depth, prob))
                terms[lemma] = (min(d0, depth), max(p0, prob))
        return sorted(
            (ExpandedTerm(term, d, p) for term, (d, p) in terms.items()),
            key=lambda e: (e.depth, e.term),
        )


def _parse_float(raw: str, lineno: int, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise GraphError(f"line {lineno}: {what} is not a number: {raw!r}") from None


def load_graph(path: str | Path) -> LexicalGraph:
    """Parse and validate a graph file; rejects cycles and dangling ids."""
    path = Path(path)
    synsets: dict[str, Synset] = {}
    raw_edges: list[tuple[int, str, str, str, float | None, float | None]] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        kind = parts[0]
        if kind == "S":
            if len(parts) < 4:
                raise GraphError(f"line {lineno}: S record needs id, pos and lemmas")
            _, sid, pos_raw = parts[:3]
            pos = _POS_ALIASES.get(pos_raw.lower())
            if pos is None:
                raise GraphError(f"line {lineno}: unknown part of speech {pos_raw!r}")
            if sid in synsets:
                raise GraphError(f"line {lineno}: duplicate synset id {sid!r}")
            lemmas = frozenset(
                normalize_lemma(x) for x in " ".join(parts[3:]).split(",") if x.strip()
            )
            if not lemmas:
                raise GraphError(f"line {lineno}: synset {sid!r} has no lemmas")
            synsets[sid] = Synset(id=sid, pos=pos, lemmas=lemmas)
        elif kind == "E":
            if not 4 <= len(parts) <= 6:
                raise GraphError(f"line {lineno}: E record needs parent, child, relation [t] [r]")
            parent, child, relation = parts[1:4]
            if relation not in RELATIONS:
                raise GraphError(f"line {lineno}: unknown relation {relation!r}")
            if parent == child:
                raise GraphError(f"line {lineno}: self-loop on {parent!r}")
            t = _parse_float(parts[4], lineno, "t") if len(parts) >= 5 else None
            r = _parse_float(parts[5], lineno, "r") if len(parts) >= 6 else None
            if t is not None and not 0.0 <= t <= 1.0:
                raise GraphError(f"line {lineno}: t must lie in [0, 1], got {t}")
            if r is not None and not 0.0 < r < 1.0:
                raise GraphError(f"line {lineno}: r must lie in (0, 1), got {r}")
            raw_edges.append((lineno, parent, child, relation, t, r))
        else:
            raise GraphError(f"line {lineno}: unknown record kind {kind!r}")

    for lineno, parent, child, *_ in raw_edges:
        for sid in (parent, child):
            if sid not in synsets:
                raise GraphError(f"line {lineno}: dangling id: edge references unknown synset {sid!r}")

    out_degree: dict[str, int] = {}
    for _, parent, *_ in raw_edges:
        out_degree[parent] = out_degree.get(parent, 0) + 1
    edges = [
        LexEdge(
            parent=parent,
            child=child,
            relation=relation,
            t=t if t is not None else 1.0 / out_degree[parent],
            r=r if r is not None else _DEFAULT_R[relation],
        )
        for _, parent, child, relation, t, r in raw_edges
    ]

    _reject_cycles(synsets, edges)
    return LexicalGraph(synsets=synsets, edges=edges)


def _reject_cycles(synsets: dict[str, Synset], edges: list[LexEdge]) -> None:
    children: dict[str, list[str]] = {}
    parents: dict[str, list[str]] = {}
    remaining = {sid: 0 for sid in synsets}
    for edge in edges:
        children.setdefault(edge.parent, []).append(edge.child)
        parents.setdefault(edge.child, []).append(edge.parent)
        remaining[edge.child] += 1
    queue = [sid for sid, deg in remaining.items() if deg == 0]
    visited = 0
    while queue:
        sid = queue.pop()
        visited += 1
        for child in children.get(sid, ()):
            remaining[child] -= 1
            if remaining[child] == 0:
                queue.append(child)
    if visited != len(synsets):
        # Every unresolved node keeps an unresolved parent, so walking
        # upward must revisit a node; the closing step is a cycle edge.
        unresolved = {sid for sid, deg in remaining.items() if deg > 0}
        node = min(unresolved)
        path: list[str] = []
        while node not in path:
            path.append(node)
            node = min(p for p in parents.get(node, ()) if p in unresolved)
        raise GraphError(f"cycle detected through edge {node!r} -> {path[-1]!r}")
