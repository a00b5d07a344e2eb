"""Simulator calibration: fit the few free knobs against reference means.

The reference targets are condition-level mean mIoU values from live
deployments of the same designs; the baseline mean anchors the population
quality via a coarse grid search over ``skill_shift``, and the consequence
thresholds are set from percentiles of the calibrated baseline run. The
remaining conditions are emergent predictions checked ordinally, not fit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from .harness import ConditionSummary, condition_preset, run_condition
from .simulator import SimTuning

# Reference condition means (percent mIoU) used as calibration targets.
DEFAULT_TARGET_MEANS = {
    "baseline": 73.7,
    "iterative": 55.6,
    "post_task_bonus": 59.5,
    "decomp_manual": 71.7,
    "decomp_oracle": 67.5,
    "variable_pay": 69.1,
    "gold_regular": 75.5,
    "gold_upfront": 75.5,
    "gold_fib_regular": 75.7,
    "gold_regular_bonus": 74.7,
    "gold_improved": 79.3,
}

BASELINE_TOLERANCE = 2.0
IMPROVED_MIN_GAP = 4.0


@dataclass
class CalibrationResult:
    tuning: SimTuning
    t_min: float
    t_bonus_b: float
    t_bonus_a: float
    baseline_mean: float
    improved_mean: float
    target_baseline: float

    @property
    def gap(self) -> float:
        return self.improved_mean - self.baseline_mean

    def overrides(self) -> dict[str, Any]:
        """Config overrides to apply to every condition preset."""
        return {
            "tuning": asdict(self.tuning),
            "t_min": self.t_min,
            "t_bonus_b": self.t_bonus_b,
            "t_bonus_a": self.t_bonus_a,
        }

    def to_json(self) -> str:
        rec = {
            "tuning": asdict(self.tuning),
            "t_min": self.t_min,
            "t_bonus_b": self.t_bonus_b,
            "t_bonus_a": self.t_bonus_a,
            "baseline_mean": self.baseline_mean,
            "improved_mean": self.improved_mean,
            "target_baseline": self.target_baseline,
        }
        return json.dumps(rec, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "CalibrationResult":
        rec = json.loads(text)
        return CalibrationResult(
            tuning=SimTuning(**rec["tuning"]),
            t_min=rec["t_min"],
            t_bonus_b=rec["t_bonus_b"],
            t_bonus_a=rec["t_bonus_a"],
            baseline_mean=rec["baseline_mean"],
            improved_mean=rec["improved_mean"],
            target_baseline=rec["target_baseline"],
        )


def load_targets(path: str | Path) -> dict[str, float]:
    """Read a targets CSV with columns condition,mean_miou."""
    out: dict[str, float] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["condition"]] = float(row["mean_miou"])
    return out


def _run(condition: str, seed: int, tuning: SimTuning, thresholds: dict[str, float] | None = None) -> ConditionSummary:
    overrides: dict[str, Any] = {"tuning": asdict(tuning)}
    if thresholds:
        overrides.update(thresholds)
    cfg = condition_preset(condition, seed=seed, overrides=overrides)
    summary, _, _ = run_condition(cfg)
    return summary


def _thresholds_from_baseline(summary: ConditionSummary) -> dict[str, float]:
    """Tier thresholds at the 10th/50th/75th percentiles of baseline quality."""
    samples = np.asarray(summary.miou_samples)
    t_min = float(np.percentile(samples, 10))
    t_b = float(np.percentile(samples, 50))
    t_a = float(np.percentile(samples, 75))
    # enforce strict ordering within [0, 100]
    t_min = min(max(round(t_min, 1), 1.0), 97.0)
    t_b = min(max(round(t_b, 1), t_min + 1.0), 98.0)
    t_a = min(max(round(t_a, 1), t_b + 1.0), 99.0)
    return {"t_min": t_min, "t_bonus_b": t_b, "t_bonus_a": t_a}


def calibrate(
    seed: int = 0,
    targets: dict[str, float] | None = None,
    base_tuning: SimTuning | None = None,
    shift_grid: tuple[float, ...] = (-0.04, -0.02, 0.0, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16),
) -> CalibrationResult:
    """Fit skill_shift to the baseline target, derive thresholds, verify the
    improved-condition gap. Strengthens tier pressure once if the gap falls
    short."""
    targets = dict(DEFAULT_TARGET_MEANS, **(targets or {}))
    tuning = base_tuning or SimTuning()
    target_baseline = targets["baseline"]

    best_shift, best_err, best_summary = 0.0, float("inf"), None
    for shift in shift_grid:
        candidate = replace(tuning, skill_shift=shift)
        summary = _run("baseline", seed, candidate)
        err = abs(summary.mean_miou - target_baseline)
        if err < best_err:
            best_shift, best_err, best_summary = shift, err, summary
    assert best_summary is not None
    tuning = replace(tuning, skill_shift=best_shift)
    thresholds = _thresholds_from_baseline(best_summary)

    improved = _run("gold_improved", seed, tuning, thresholds)
    if improved.mean_miou - best_summary.mean_miou < IMPROVED_MIN_GAP:
        # one escalation: stronger tier pressure and faster learning
        tuning = replace(
            tuning,
            tier_pressure_b=max(0.0, 1.0 - 1.4 * (1.0 - tuning.tier_pressure_b)),
            tier_pressure_at_risk=max(0.0, 1.0 - 1.4 * (1.0 - tuning.tier_pressure_at_risk)),
            learn_headroom=min(0.5, tuning.learn_headroom + 0.08),
        )
        improved = _run("gold_improved", seed, tuning, thresholds)

    return CalibrationResult(
        tuning=tuning,
        t_min=thresholds["t_min"],
        t_bonus_b=thresholds["t_bonus_b"],
        t_bonus_a=thresholds["t_bonus_a"],
        baseline_mean=best_summary.mean_miou,
        improved_mean=improved.mean_miou,
        target_baseline=target_baseline,
    )
