"""Independent brute-force oracles shared across the test suite.

Each oracle deliberately takes a different computational route from the
implementation it checks: unit-cell counting instead of continuous
geometry, permutation enumeration instead of the assignment solver, and
pairwise win-counting instead of midrank sums.
"""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np

from visgold.geometry import BoundingBox


def pixel_iou(a: BoundingBox, b: BoundingBox) -> float:
    """IoU for integer-coordinate boxes by counting unit grid cells."""
    for box in (a, b):
        assert all(float(v).is_integer() for v in (box.x, box.y, box.w, box.h))
    x0 = int(min(a.x, b.x))
    y0 = int(min(a.y, b.y))
    x1 = int(max(a.right, b.right))
    y1 = int(max(a.bottom, b.bottom))
    inter = union = 0
    for cx in range(x0, x1):
        for cy in range(y0, y1):
            in_a = a.x <= cx < a.right and a.y <= cy < a.bottom
            in_b = b.x <= cx < b.right and b.y <= cy < b.bottom
            inter += in_a and in_b
            union += in_a or in_b
    return inter / union if union else 0.0


def best_assignment_total(matrix: np.ndarray) -> float:
    """Maximum total over all one-to-one assignments, by enumerating
    permutations of the larger side against the smaller."""
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return 0.0
    if rows <= cols:
        base = matrix
    else:
        base = matrix.T
        rows, cols = cols, rows
    best = 0.0
    for perm in permutations(range(cols), rows):
        total = sum(base[i, perm[i]] for i in range(rows))
        best = max(best, total)
    return best


def mw_u_pairwise(a: list[float], b: list[float]) -> float:
    """U statistic of sample a by direct pairwise win counting."""
    u = 0.0
    for x in a:
        for y in b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def mw_exact_p_oracle(a: list[float], b: list[float]) -> float:
    """Exact two-sided p by enumerating group assignments of the pooled
    values and counting pairwise-derived U statistics at least as far from
    the null center as the observed one."""
    pooled = list(a) + list(b)
    n_a = len(a)
    center = n_a * len(b) / 2.0
    u_obs = mw_u_pairwise(a, b)
    d_obs = abs(u_obs - center)
    total = extreme = 0
    for idx in combinations(range(len(pooled)), n_a):
        group_a = [pooled[i] for i in idx]
        group_b = [pooled[i] for i in range(len(pooled)) if i not in idx]
        u = mw_u_pairwise(group_a, group_b)
        total += 1
        if abs(u - center) >= d_obs - 1e-9:
            extreme += 1
    return extreme / total


def random_box(rng: np.random.Generator, extent: float = 100.0, integer: bool = False) -> BoundingBox:
    if integer:
        x = int(rng.integers(0, 25))
        y = int(rng.integers(0, 25))
        w = int(rng.integers(1, 18))
        h = int(rng.integers(1, 18))
        return BoundingBox(float(x), float(y), float(w), float(h))
    x = rng.uniform(0, extent * 0.8)
    y = rng.uniform(0, extent * 0.8)
    w = rng.uniform(0.5, extent * 0.3)
    h = rng.uniform(0.5, extent * 0.3)
    return BoundingBox(x, y, w, h)
