"""Co-occurrence proximity measures over document hit counts.

Everything here is a pure function of its arguments. Counts are
document-level: f_x is the number of documents containing term x, f_xy the
number containing both terms, and m the total indexed document count. All
logarithms are base 2.

Zero co-occurrence is handled by sentinels rather than errors so that
rankings stay total: the mutual-information score becomes -inf, the
normalized distance becomes NGD_UNRELATED, and the blended distance is
defined as 1.0 (the far end of its [0, 1] codomain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

DEFAULT_RHO = 0.3
DEFAULT_EPSILON = 1e-6

# Distance assigned to a pair that never co-occurs. Finite on purpose: it
# participates in the mu2 maximum, and an infinite value there would zero
# out the NGD component for every other pair in the context.
NGD_UNRELATED = 1.0


@dataclass(frozen=True)
class HitCounts:
    """Occurrence statistics for one term pair.

    Invariants are checked at construction: f_xy <= min(f_x, f_y),
    f_x <= m, f_y <= m, m >= 1, all counts non-negative.
    """

    f_x: int
    f_y: int
    f_xy: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise DomainError(f"total document count must be >= 1, got {self.m}")
        if self.f_x < 0 or self.f_y < 0 or self.f_xy < 0:
            raise DomainError(
                f"counts must be non-negative, got f_x={self.f_x} f_y={self.f_y} f_xy={self.f_xy}"
            )
        if self.f_x > self.m or self.f_y > self.m:
            raise DomainError(
                f"term counts exceed total: f_x={self.f_x} f_y={self.f_y} m={self.m}"
            )
        if self.f_xy > min(self.f_x, self.f_y):
            raise DomainError(
                f"joint count exceeds a marginal: f_xy={self.f_xy} f_x={self.f_x} f_y={self.f_y}"
            )

    def swapped(self) -> "HitCounts":
        return HitCounts(f_x=self.f_y, f_y=self.f_x, f_xy=self.f_xy, m=self.m)


@dataclass(frozen=True)
class ContextNorms:
    """Normalization state for one evaluation context.

    mu1 is the maximum mutual-information score over the context's pairs,
    mu2 the maximum normalized distance, both floored at epsilon. rho
    blends the two components.
    """

    mu1: float
    mu2: float
    rho: float = DEFAULT_RHO
    epsilon: float = field(default=DEFAULT_EPSILON, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho}")
        if self.epsilon <= 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if self.mu1 < self.epsilon or self.mu2 < self.epsilon:
            raise DomainError(
                f"norms must be floored at epsilon={self.epsilon}, got mu1={self.mu1} mu2={self.mu2}"
            )


def pmi(h: HitCounts) -> float:
    """Pointwise mutual information of the pair, log2((f_xy * m) / (f_x * f_y)).

    Zero when the counts satisfy independence f_xy * m == f_x * f_y,
    negative when the terms are anti-correlated, -inf when they never
    co-occur. Raises DomainError for a term with zero frequency.
    """
    if h.f_x == 0 or h.f_y == 0:
        raise DomainError(f"unknown term: zero frequency (f_x={h.f_x}, f_y={h.f_y})")
    if h.f_xy == 0:
        return float("-inf")
    return math.log2((h.f_xy * h.m) / (h.f_x * h.f_y))


def ngd(h: HitCounts) -> float:
    """Normalized engine distance of the pair.

    (max(log f_x, log f_y) - log f_xy) / (log m - min(log f_x, log f_y)).
    The ratio is independent of log base; base 2 is used for determinism.
    Symmetric in x and y. Zero when f_x == f_y == f_xy. Returns
    NGD_UNRELATED when the pair never co-occurs. Requires m strictly
    greater than both term counts so the denominator cannot vanish.
    """
    if h.f_x == 0 or h.f_y == 0:
        raise DomainError(f"unknown term: zero frequency (f_x={h.f_x}, f_y={h.f_y})")
    if h.m <= max(h.f_x, h.f_y):
        raise DomainError(
            f"M too small: total {h.m} must exceed max(f_x, f_y)={max(h.f_x, h.f_y)}"
        )
    if h.f_xy == 0:
        return NGD_UNRELATED
    lx, ly = math.log2(h.f_x), math.log2(h.f_y)
    return (max(lx, ly) - math.log2(h.f_xy)) / (math.log2(h.m) - min(lx, ly))


def context_norms(
    pairs: list[HitCounts],
    rho: float = DEFAULT_RHO,
    epsilon: float = DEFAULT_EPSILON,
) -> ContextNorms:
    """Compute mu1 and mu2 over a context of pairs.

    Pairs that never co-occur are skipped for mu1 (their score is -inf)
    and contribute NGD_UNRELATED to mu2. Both maxima are floored at
    epsilon so downstream divisions stay defined even for degenerate
    contexts. Every pair must satisfy the pmi/ngd preconditions.
    """
    if not pairs:
        raise DomainError("empty context: need at least one pair to compute norms")
    pmi_values = [pmi(h) for h in pairs if h.f_xy > 0]
    ngd_values = [ngd(h) for h in pairs]
    mu1 = max([epsilon] + pmi_values)
    mu2 = max([epsilon] + ngd_values)
    return ContextNorms(mu1=mu1, mu2=mu2, rho=rho, epsilon=epsilon)


def context_norms_from_components(
    pmi_values: list[float],
    ngd_values: list[float],
    rho: float = DEFAULT_RHO,
    epsilon: float = DEFAULT_EPSILON,
) -> ContextNorms:
    """Like context_norms but over precomputed component values."""
    if not pmi_values and not ngd_values:
        raise DomainError("empty context: need at least one component value")
    mu1 = max([epsilon] + [v for v in pmi_values if v != float("-inf")])
    mu2 = max([epsilon] + list(ngd_values))
    return ContextNorms(mu1=mu1, mu2=mu2, rho=rho, epsilon=epsilon)


def pming_from_components(pmi_val: float, ngd_val: float, norms: ContextNorms) -> float:
    """Blend normalized components into a distance in [0, 1].

    clamp01(rho * (1 - pmi/mu1) + (1 - rho) * (ngd/mu2)). Clamping absorbs
    components that fall outside their context's range (negative scores,
    distances above mu2).
    """
    # Guard the rho extremes: 0 * inf would poison the sum with NaN.
    if norms.rho == 0.0:
        raw = ngd_val / norms.mu2
    elif norms.rho == 1.0:
        raw = 1.0 - pmi_val / norms.mu1
    else:
        raw = norms.rho * (1.0 - pmi_val / norms.mu1) + (1.0 - norms.rho) * (
            ngd_val / norms.mu2
        )
    return min(1.0, max(0.0, raw))


def pming(h: HitCounts, norms: ContextNorms) -> float:
    """Blended proximity distance of the pair within its context, in [0, 1].

    Arguments are ordered internally so the larger count plays the role of
    f_x; the operation is therefore symmetric. A pair that never co-occurs
    is at maximal distance 1.0 by definition, not an error.
    """
    if h.f_x < h.f_y:
        h = h.swapped()
    if h.f_x == 0 or h.f_y == 0:
        raise DomainError(f"unknown term: zero frequency (f_x={h.f_x}, f_y={h.f_y})")
    if h.f_xy == 0:
        return 1.0
    return pming_from_components(pmi(h), ngd(h), norms)
