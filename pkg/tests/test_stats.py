from __future__ import annotations

import numpy as np
import pytest

from helpers import mw_exact_p_oracle, mw_u_pairwise
from visgold.stats import bonferroni, mann_whitney, significance_marker


def test_separated_samples_exact_case():
    result = mann_whitney([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    assert result.u == 0.0
    assert result.method == "exact"
    assert result.p == pytest.approx(0.1, abs=0)  # 2 of C(6,3)=20 assignments


def test_u_oriented_to_first_sample():
    result = mann_whitney([4.0, 5.0, 6.0], [1.0, 2.0, 3.0])
    assert result.u == 9.0
    assert result.p == pytest.approx(0.1, abs=0)


def test_identical_samples_degenerate():
    result = mann_whitney([5.0, 5.0], [5.0, 5.0, 5.0])
    assert result.degenerate
    assert result.p == 1.0


def test_equal_samples_p_one():
    result = mann_whitney([1.0, 2.0], [1.0, 2.0])
    assert result.p == 1.0


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        mann_whitney([], [1.0])


def test_exact_matches_bruteforce_oracle_on_random_samples():
    rng = np.random.default_rng(99)
    for _ in range(60):
        n_a = int(rng.integers(1, 9))
        n_b = int(rng.integers(1, 9))
        # integer values force plenty of ties
        a = [float(v) for v in rng.integers(0, 6, size=n_a)]
        b = [float(v) for v in rng.integers(0, 6, size=n_b)]
        if len(set(a + b)) == 1:
            continue
        result = mann_whitney(a, b)
        assert result.method == "exact"
        assert result.u == mw_u_pairwise(a, b)
        assert result.p == pytest.approx(mw_exact_p_oracle(a, b), abs=0)


def test_u_statistic_range_and_tie_handling():
    a = [1.0, 2.0, 2.0]
    b = [2.0, 3.0]
    result = mann_whitney(a, b)
    assert result.u == mw_u_pairwise(a, b)
    assert 0 <= result.u <= len(a) * len(b)


def test_normal_approximation_used_for_large_samples():
    rng = np.random.default_rng(5)
    a = list(rng.normal(0, 1, 40))
    b = list(rng.normal(0.8, 1, 40))
    result = mann_whitney(a, b)
    assert result.method == "normal"
    assert result.p < 0.01


def test_exact_and_normal_agree_within_tolerance_at_boundary():
    rng = np.random.default_rng(17)
    from visgold.stats import _normal_p, _u_of_first

    for _ in range(40):
        a = list(rng.normal(0, 1, 8))
        b = list(rng.normal(0.5, 1, 8))
        exact = mann_whitney(a, b)
        approx_p, _ = _normal_p(a, b, _u_of_first(a, b))
        assert exact.p == pytest.approx(approx_p, abs=0.02)


def test_two_sided_p_never_exceeds_one():
    rng = np.random.default_rng(23)
    for _ in range(50):
        a = list(rng.normal(0, 1, int(rng.integers(2, 30))))
        b = list(rng.normal(0, 1, int(rng.integers(2, 30))))
        result = mann_whitney(a, b)
        assert 0.0 < result.p <= 1.0


def test_bonferroni_scales_by_family_size():
    results = {
        "x": mann_whitney([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]),
        "y": mann_whitney([1.0, 2.0], [1.5, 2.5]),
        "z": mann_whitney([9.0, 8.0], [1.0, 2.0]),
    }
    adjusted = bonferroni(results)
    assert adjusted["x"].p_adjusted == pytest.approx(min(1.0, 3 * results["x"].p))
    assert all(r.p_adjusted <= 1.0 for r in adjusted.values())


def test_significance_markers():
    assert significance_marker(0.2) == ""
    assert significance_marker(0.04) == "*"
    assert significance_marker(0.009) == "**"
    assert significance_marker(0.0009) == "***"
