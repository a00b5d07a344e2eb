from __future__ import annotations

import pytest

from visgold.calibrate import (
    DEFAULT_TARGET_MEANS,
    CalibrationResult,
    calibrate,
    load_targets,
)
from visgold.harness import condition_preset, run_condition
from visgold.simulator import SimTuning
from visgold.stats import mann_whitney


def test_load_targets_csv(tmp_path):
    path = tmp_path / "targets.csv"
    path.write_text("condition,mean_miou\nbaseline,70.0\ngold_improved,78.0\n")
    targets = load_targets(path)
    assert targets == {"baseline": 70.0, "gold_improved": 78.0}


def test_default_targets_cover_every_condition():
    from visgold.harness import CONDITIONS

    assert set(DEFAULT_TARGET_MEANS) == set(CONDITIONS)


def test_calibration_result_roundtrip():
    result = CalibrationResult(
        tuning=SimTuning(skill_shift=0.05),
        t_min=48.0,
        t_bonus_b=74.0,
        t_bonus_a=83.0,
        baseline_mean=73.5,
        improved_mean=78.9,
        target_baseline=73.7,
    )
    back = CalibrationResult.from_json(result.to_json())
    assert back == result
    assert back.gap == pytest.approx(5.4)
    overrides = back.overrides()
    assert overrides["t_min"] == 48.0
    assert overrides["tuning"]["skill_shift"] == 0.05


def test_calibrate_produces_ordered_thresholds_and_anchored_baseline():
    result = calibrate(seed=0)
    assert 0 < result.t_min < result.t_bonus_b < result.t_bonus_a <= 100
    assert abs(result.baseline_mean - result.target_baseline) <= 2.0
    assert result.gap >= 4.0


def test_improved_significantly_beats_fib_regular_on_calibrated_run():
    result = calibrate(seed=0)
    overrides = result.overrides()
    improved, _, _ = run_condition(condition_preset("gold_improved", seed=0, overrides=overrides))
    fib, _, _ = run_condition(condition_preset("gold_fib_regular", seed=0, overrides=overrides))
    assert improved.mean_miou > fib.mean_miou
    verdict = mann_whitney(list(improved.miou_samples), list(fib.miou_samples))
    assert verdict.p < 0.05
