"""Two-sided Mann-Whitney U with exact small-sample enumeration.

U is oriented to the first sample and computed from midranks. For samples
of size up to EXACT_LIMIT each, the p value enumerates every way the
pooled values could be split between the groups; beyond that it uses the
normal approximation with tie-corrected variance and a continuity
correction. Ties are handled identically in both regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

EXACT_LIMIT = 8


@dataclass(frozen=True)
class StatResult:
    u: float  # U statistic of the first sample
    p: float  # two-sided
    n_a: int
    n_b: int
    method: str  # "exact" or "normal"
    degenerate: bool = False  # all pooled values identical
    p_adjusted: float | None = None  # Bonferroni-adjusted, filled by comparisons

    def __post_init__(self) -> None:
        if not (0.0 <= self.u <= self.n_a * self.n_b):
            raise ValueError("U out of range")
        if not (0.0 < self.p <= 1.0):
            raise ValueError("p must be in (0, 1]")


def _midranks(pooled: Sequence[float]) -> list[float]:
    """Ranks 1..N for sorted input, with tied values sharing their mean rank."""
    n = len(pooled)
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[j + 1] == pooled[i]:
            j += 1
        rank = (i + 1 + j + 1) / 2.0
        for k in range(i, j + 1):
            ranks[k] = rank
        i = j + 1
    return ranks


def _u_of_first(a: Sequence[float], b: Sequence[float]) -> float:
    pooled = sorted(list(a) + list(b))
    ranks = _midranks(pooled)
    rank_of: dict[float, float] = {v: r for v, r in zip(pooled, ranks)}
    r_a = sum(rank_of[v] for v in a)
    n_a = len(a)
    return r_a - n_a * (n_a + 1) / 2.0


def _exact_p(a: Sequence[float], b: Sequence[float], u_obs: float) -> float:
    """Enumerate all C(n+m, n) group assignments of the pooled values and
    count those at least as extreme (two-sided, distance from nm/2)."""
    pooled = sorted(list(a) + list(b))
    ranks = _midranks(pooled)
    n_a, n_b = len(a), len(b)
    center = n_a * n_b / 2.0
    d_obs = abs(u_obs - center)
    base = n_a * (n_a + 1) / 2.0
    total = 0
    extreme = 0
    eps = 1e-9
    for idx in combinations(range(len(pooled)), n_a):
        u = sum(ranks[i] for i in idx) - base
        total += 1
        if abs(u - center) >= d_obs - eps:
            extreme += 1
    return extreme / total


def _normal_p(a: Sequence[float], b: Sequence[float], u_obs: float) -> tuple[float, bool]:
    pooled = sorted(list(a) + list(b))
    n_a, n_b = len(a), len(b)
    n = n_a + n_b
    # tie correction: sum over tie groups of (t^3 - t)
    tie_sum = 0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[j + 1] == pooled[i]:
            j += 1
        t = j - i + 1
        tie_sum += t**3 - t
        i = j + 1
    mu = n_a * n_b / 2.0
    var = n_a * n_b / 12.0 * ((n + 1) - tie_sum / (n * (n - 1)))
    if var <= 0:
        return 1.0, True
    diff = u_obs - mu
    # continuity correction shrinks |diff| by 0.5
    z = (abs(diff) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    p = math.erfc(z / math.sqrt(2.0))
    return min(1.0, max(p, 1e-300)), False


def mann_whitney(a: Sequence[float], b: Sequence[float]) -> StatResult:
    """Two-sided rank-sum comparison of two samples."""
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    u_obs = _u_of_first(a, b)
    if len(set(list(a) + list(b))) == 1:
        return StatResult(u=u_obs, p=1.0, n_a=len(a), n_b=len(b), method="exact", degenerate=True)
    if len(a) <= EXACT_LIMIT and len(b) <= EXACT_LIMIT:
        p = _exact_p(a, b, u_obs)
        return StatResult(u=u_obs, p=p, n_a=len(a), n_b=len(b), method="exact")
    p, degenerate = _normal_p(a, b, u_obs)
    return StatResult(u=u_obs, p=p, n_a=len(a), n_b=len(b), method="normal", degenerate=degenerate)


def bonferroni(results: dict[str, StatResult]) -> dict[str, StatResult]:
    """Adjust a family of comparisons: p_adj = min(1, m * p)."""
    m = len(results)
    out: dict[str, StatResult] = {}
    for name, res in results.items():
        out[name] = StatResult(
            u=res.u,
            p=res.p,
            n_a=res.n_a,
            n_b=res.n_b,
            method=res.method,
            degenerate=res.degenerate,
            p_adjusted=min(1.0, m * res.p),
        )
    return out


def significance_marker(p: float) -> str:
    """The conventional verdict markers at the 0.05 / 0.01 / 0.001 levels."""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""
