"""Candidate ranking by blended co-occurrence distance, and rank-correlation
evaluation against aggregated human ground truth.

The normalization context for one ranking call is the seed paired with
every candidate; norms are computed over the pairs that satisfy the
measure preconditions. Candidates whose seed pair cannot be measured at
all (zero frequency anywhere) rank last at distance 1.0 so the list shown
to users stays total.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .counts import CountSource
from .errors import DomainError, ExpansionError, RankingEmptyError
from .measures import (
    DEFAULT_EPSILON,
    DEFAULT_RHO,
    NGD_UNRELATED,
    ContextNorms,
    HitCounts,
    context_norms,
    ngd,
    pmi,
    pming,
)
from .pool import CandidateSource, QueryKey

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankedCandidate:
    term: str
    distance: float
    source: CandidateSource
    pmi: float
    ngd: float

    @property
    def components(self) -> tuple[float, float]:
        return (self.pmi, self.ngd)


def rank_candidates(
    seed: QueryKey,
    candidates: Sequence[tuple[str, CandidateSource]],
    counts: CountSource,
    rho: float = DEFAULT_RHO,
    epsilon: float = DEFAULT_EPSILON,
) -> list[RankedCandidate]:
    """Score every candidate against the seed and sort ascending.

    Ties break lexicographically by term. A candidate whose counts cannot
    be fetched or measured is dropped with a warning; only when all of
    them drop does the call fail.
    """
    if not candidates:
        raise DomainError("no candidates to rank")
    m = counts.total()
    seed_terms = list(seed.tokens)
    f_seed = counts.count(seed_terms)

    measured: list[tuple[str, CandidateSource, HitCounts]] = []
    unmeasured: list[tuple[str, CandidateSource]] = []
    for term, source in candidates:
        try:
            f_c = counts.count([term])
            f_pair = counts.count(seed_terms + [term])
            if f_seed == 0 or f_c == 0:
                unmeasured.append((term, source))
                continue
            h = HitCounts(f_x=f_seed, f_y=f_c, f_xy=f_pair, m=m)
            if m <= max(f_seed, f_c) and f_pair > 0:
                raise DomainError(
                    f"M too small: total {m} must exceed max(f_x, f_y)={max(f_seed, f_c)}"
                )
            measured.append((term, source, h))
        except ExpansionError as exc:
            logger.warning("dropping candidate %r: %s", term, exc)
    if not measured and not unmeasured:
        raise RankingEmptyError("every candidate was dropped while ranking")

    context = [h for _, _, h in measured if h.m > max(h.f_x, h.f_y)]
    norms = (
        context_norms(context, rho=rho, epsilon=epsilon)
        if context
        else ContextNorms(mu1=epsilon, mu2=epsilon, rho=rho, epsilon=epsilon)
    )

    ranked = []
    for term, source, h in measured:
        if h.f_xy == 0:
            ranked.append(
                RankedCandidate(term, 1.0, source, pmi=float("-inf"), ngd=NGD_UNRELATED)
            )
        else:
            ranked.append(
                RankedCandidate(term, pming(h, norms), source, pmi=pmi(h), ngd=ngd(h))
            )
    for term, source in unmeasured:
        ranked.append(RankedCandidate(term, 1.0, source, pmi=float("-inf"), ngd=NGD_UNRELATED))
    ranked.sort(key=lambda c: (c.distance, c.term))
    return ranked


# -- evaluation ------------------------------------------------------------


@dataclass(frozen=True)
class VoterRanking:
    voter_id: str
    order: tuple[str, ...]


@dataclass(frozen=True)
class UERanking:
    """Ground-truth ordering aggregated from voter rankings."""

    order: tuple[str, ...]
    mean_ranks: Mapping[str, float]


def _check_same_terms(reference: set[str], other: Sequence[str], who: str) -> None:
    other_set = set(other)
    if len(other_set) != len(other):
        raise DomainError(f"{who}: ranking repeats a term")
    if other_set != reference:
        missing = sorted(reference - other_set)
        extra = sorted(other_set - reference)
        raise DomainError(f"{who}: term sets differ (missing={missing}, extra={extra})")


def aggregate_uer(votes: Sequence[VoterRanking]) -> UERanking:
    """Mean 1-based position per term; order ascending, ties lexicographic."""
    if not votes:
        raise DomainError("need at least one voter ranking")
    reference = set(votes[0].order)
    if len(reference) != len(votes[0].order):
        raise DomainError(f"voter {votes[0].voter_id}: ranking repeats a term")
    totals = {term: 0 for term in reference}
    for vote in votes:
        _check_same_terms(reference, vote.order, f"voter {vote.voter_id}")
        for pos, term in enumerate(vote.order, start=1):
            totals[term] += pos
    means = {term: totals[term] / len(votes) for term in reference}
    order = tuple(sorted(means, key=lambda t: (means[t], t)))
    return UERanking(order=order, mean_ranks=means)


def kendall_tau(r1: Sequence[str], r2: Sequence[str]) -> float:
    """Tau-a over two strict rankings: 1 - 2 * discordant / C(n, 2)."""
    if len(set(r1)) != len(r1):
        raise DomainError("first ranking repeats a term")
    _check_same_terms(set(r1), r2, "second ranking")
    n = len(r1)
    if n < 2:
        raise DomainError("rank correlation needs at least two terms")
    pos = {term: i for i, term in enumerate(r2)}
    discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            if pos[r1[i]] > pos[r1[j]]:
                discordant += 1
    return 1.0 - 2.0 * discordant / (n * (n - 1) / 2)


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2 + 1  # 1-based average rank of the tied block
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def spearman_rho(uer: UERanking, order: Sequence[str]) -> float:
    """Pearson correlation between midranked mean ranks and a strict order."""
    _check_same_terms(set(uer.order), order, "system ranking")
    terms = sorted(uer.order)
    if len(terms) < 2:
        raise DomainError("rank correlation needs at least two terms")
    pos = {term: float(i + 1) for i, term in enumerate(order)}
    x = _midranks([uer.mean_ranks[t] for t in terms])
    y = [pos[t] for t in terms]
    n = len(terms)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    if vx == 0.0 or vy == 0.0:
        raise DomainError("rank correlation undefined: a ranking is constant")
    return cov / (vx * vy) ** 0.5


@dataclass(frozen=True)
class SystemScore:
    name: str
    kendall: float
    spearman: float
    order: tuple[str, ...]


@dataclass(frozen=True)
class ComparisonReport:
    uer: UERanking
    systems: tuple[SystemScore, ...]

    def to_records(self) -> list[dict]:
        records: list[dict] = [{"system": "uer", "order": list(self.uer.order)}]
        for score in self.systems:
            records.append(
                {
                    "system": score.name,
                    "kendall_tau": score.kendall,
                    "spearman_rho": score.spearman,
                    "order": list(score.order),
                }
            )
        return records

    def render_text(self) -> str:
        names = ["rank", "uer"] + [s.name for s in self.systems]
        rows = [
            [str(i + 1), self.uer.order[i]] + [s.order[i] for s in self.systems]
            for i in range(len(self.uer.order))
        ]
        widths = [max(len(col), *(len(row[i]) for row in rows)) for i, col in enumerate(names)]
        lines = ["  ".join(col.ljust(widths[i]) for i, col in enumerate(names))]
        lines.append("  ".join("-" * w for w in widths))
        for row in rows:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
        for score in self.systems:
            lines.append(
                f"{score.name}: kendall_tau={score.kendall:.4f} spearman_rho={score.spearman:.4f}"
            )
        return "\n".join(lines) + "\n"


def compare_report(uer: UERanking, systems: Mapping[str, Sequence[str]]) -> ComparisonReport:
    """Kendall and Spearman of each system against the ground truth."""
    scores = []
    for name, order in systems.items():
        scores.append(
            SystemScore(
                name=name,
                kendall=kendall_tau(uer.order, order),
                spearman=spearman_rho(uer, order),
                order=tuple(order),
            )
        )
    return ComparisonReport(uer=uer, systems=tuple(scores))


def load_voter_rankings(path: str | Path) -> list[VoterRanking]:
    """Read one `{voter_id, order:[terms]}` JSON object per line."""
    votes = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            votes.append(
                VoterRanking(voter_id=str(rec["voter_id"]), order=tuple(str(t) for t in rec["order"]))
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DomainError(f"{path}: line {lineno}: bad voter ranking: {exc}") from exc
    return votes
