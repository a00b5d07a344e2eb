"""Advertised prices, base pay and bonuses for every pricing condition.

Amounts are integer cents internally to avoid rounding drift; use
``format_cents`` for display. The binned baseline pays a low amount for
object counts up to the bin edge and a high amount above it, amortizing
to a constant per-box rate over the standard corpus shape.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .dataset import Scene
from .scoring import ScoreReport

logger = logging.getLogger(__name__)

# Object-count range of the standard corpus; prices extrapolate beyond it
# (with a warning) per each policy's rule.
DEFAULT_COUNT_RANGE = (1, 14)


@dataclass(frozen=True)
class BaselineBinned:
    low_cents: int = 16
    high_cents: int = 44
    bin_edge: int = 7  # counts <= bin_edge pay low_cents

    def __post_init__(self) -> None:
        if self.bin_edge < 1:
            raise ValueError("bin_edge must be >= 1")
        if self.low_cents < 0 or self.high_cents < 0:
            raise ValueError("amounts must be >= 0")


@dataclass(frozen=True)
class VariablePay:
    per_box_cents: int = 4

    def __post_init__(self) -> None:
        if self.per_box_cents < 0:
            raise ValueError("amounts must be >= 0")


@dataclass(frozen=True)
class PostTaskBonus:
    base_cents: int = 4
    per_correct_cents: int = 4
    correct_tau: float = 0.5  # a matched box counts as correct above this IoU

    def __post_init__(self) -> None:
        if self.base_cents < 0 or self.per_correct_cents < 0:
            raise ValueError("amounts must be >= 0")


@dataclass(frozen=True)
class FlatSubtask:
    per_hit_cents: int = 8

    def __post_init__(self) -> None:
        if self.per_hit_cents < 0:
            raise ValueError("amounts must be >= 0")


@dataclass(frozen=True)
class RegularBonusPay:
    """Binned base pay; the per-image gold bonus comes from the ledger."""

    base: BaselineBinned = field(default_factory=BaselineBinned)


PaymentPolicy = BaselineBinned | VariablePay | PostTaskBonus | FlatSubtask | RegularBonusPay


@dataclass(frozen=True)
class Payout:
    hit_id: str
    advertised_cents: int
    base_cents: int
    bonus_cents: int

    def __post_init__(self) -> None:
        if min(self.advertised_cents, self.base_cents, self.bonus_cents) < 0:
            raise ValueError("payout amounts must be >= 0")

    @property
    def total_cents(self) -> int:
        return self.base_cents + self.bonus_cents


def format_cents(cents: int) -> str:
    return f"${cents / 100:.2f}"


def price(policy: PaymentPolicy, scene_count: int, count_range: tuple[int, int] = DEFAULT_COUNT_RANGE) -> int:
    """Advertised price in cents for a scene with the given object count."""
    if scene_count < 1:
        raise ValueError("scene_count must be >= 1")
    if not (count_range[0] <= scene_count <= count_range[1]):
        logger.warning(
            "object count %d outside configured corpus range %s; extrapolating",
            scene_count,
            count_range,
        )
    if isinstance(policy, BaselineBinned):
        return policy.low_cents if scene_count <= policy.bin_edge else policy.high_cents
    if isinstance(policy, VariablePay):
        return policy.per_box_cents * scene_count
    if isinstance(policy, PostTaskBonus):
        return policy.base_cents
    if isinstance(policy, FlatSubtask):
        return policy.per_hit_cents
    if isinstance(policy, RegularBonusPay):
        return price(policy.base, scene_count, count_range)
    raise TypeError(f"unknown payment policy: {policy!r}")


def settle(
    policy: PaymentPolicy,
    scene: Scene,
    report: ScoreReport,
    hit_id: str = "",
    ledger_bonus_cents: int = 0,
) -> Payout:
    """Final payout for a scored submission.

    Post-task bonus pays the per-correct rate for every ground-truth box
    matched above the correctness threshold, never less than the base.
    All other policies pay the advertised price plus whatever consequence
    bonus the ledger granted.
    """
    if len(report.per_gt_iou) != scene.count:
        raise ValueError(f"report does not belong to scene {scene.scene_id!r}")
    advertised = price(policy, scene.count)
    if isinstance(policy, PostTaskBonus):
        correct = sum(1 for v in report.per_gt_iou if v > policy.correct_tau)
        total = max(policy.base_cents, policy.per_correct_cents * correct)
        return Payout(
            hit_id=hit_id,
            advertised_cents=advertised,
            base_cents=policy.base_cents,
            bonus_cents=total - policy.base_cents,
        )
    return Payout(
        hit_id=hit_id,
        advertised_cents=advertised,
        base_cents=advertised,
        bonus_cents=max(0, ledger_bonus_cents),
    )
