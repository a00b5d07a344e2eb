"""Running worker-quality accounting over visible golds.

The ledger tracks gold scores only; standard HITs never enter it. Tiers
derive purely from the running average against the three thresholds, and
blocking is absorbing. Consequences depend on the condition's mode:
warning-only, flat per-image bonus, or the tiered design combining both.
All currency amounts are integer cents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Tier(str, Enum):
    A = "A"
    B = "B"
    STANDARD = "Standard"
    AT_RISK = "AtRisk"


class ConsequenceMode(str, Enum):
    NONE = "none"
    WARNING = "warning"
    BONUS = "bonus"
    TIERED = "tiered"


class ActionKind(str, Enum):
    NONE = "none"
    WARN = "warn"
    BONUS = "bonus"
    BLOCK = "block"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    bonus_cents: int = 0


@dataclass(frozen=True)
class TierPolicy:
    t_min: float = 50.0
    t_bonus_b: float = 75.0
    t_bonus_a: float = 85.0
    bonus_small_cents: int = 8
    bonus_large_cents: int = 22
    large_count_threshold: int = 8  # object counts >= this get the large bonus

    def __post_init__(self) -> None:
        if not (0.0 <= self.t_min < self.t_bonus_b < self.t_bonus_a <= 100.0):
            raise ValueError("thresholds must satisfy 0 <= t_min < t_bonus_b < t_bonus_a <= 100")
        if self.bonus_small_cents < 0 or self.bonus_large_cents < 0:
            raise ValueError("bonus amounts must be >= 0")
        if self.large_count_threshold < 1:
            raise ValueError("large_count_threshold must be >= 1")


def tier_for(running_avg: float, policy: TierPolicy) -> Tier:
    """Quality tier as a pure function of running gold accuracy."""
    if running_avg >= policy.t_bonus_a:
        return Tier.A
    if running_avg >= policy.t_bonus_b:
        return Tier.B
    if running_avg >= policy.t_min:
        return Tier.STANDARD
    return Tier.AT_RISK


def bonus_amount_for_count(image_count: int, policy: TierPolicy) -> int:
    if image_count < 1:
        raise ValueError("image_count must be >= 1")
    if image_count >= policy.large_count_threshold:
        return policy.bonus_large_cents
    return policy.bonus_small_cents


def regular_bonus(image_count: int, score: float, threshold: float, policy: TierPolicy | None = None) -> int:
    """Flat per-image gold bonus in cents: the small amount below the object
    count boundary, the large amount at or above it, zero below threshold."""
    if image_count < 1:
        raise ValueError("image_count must be >= 1")
    policy = policy or TierPolicy()
    if score < threshold:
        return 0
    return bonus_amount_for_count(image_count, policy)


@dataclass
class WorkerLedger:
    worker_id: str
    gold_scores: list[float] = field(default_factory=list)
    blocked: bool = False
    warnings_issued: int = 0
    bonuses_awarded: list[tuple[str, int]] = field(default_factory=list)  # (hit_id, cents)

    @property
    def running_avg(self) -> float:
        if not self.gold_scores:
            return 0.0
        return sum(self.gold_scores) / len(self.gold_scores)

    def tier(self, policy: TierPolicy) -> Tier:
        return tier_for(self.running_avg, policy)

    @property
    def bonus_total_cents(self) -> int:
        return sum(amount for _, amount in self.bonuses_awarded)


def update_ledger(
    ledger: WorkerLedger,
    policy: TierPolicy,
    gold_score: float,
    *,
    image_count: int = 1,
    mode: ConsequenceMode = ConsequenceMode.WARNING,
    hit_id: str = "",
    strike_out: bool = False,
) -> Action:
    """Record one gold score and apply the condition's consequence.

    ``strike_out`` is the gold scheduler's three-strike verdict; the ledger
    itself never decides blocking. Warning modes warn on every failed gold;
    the tiered mode additionally pays the per-image bonus at the full rate
    for tier A and half rate for tier B.
    """
    if ledger.blocked:
        raise ValueError(f"worker {ledger.worker_id!r} is blocked; ledger is frozen")
    ledger.gold_scores.append(gold_score)

    if strike_out:
        ledger.blocked = True
        return Action(ActionKind.BLOCK)

    failed = gold_score < policy.t_min
    if mode in (ConsequenceMode.WARNING, ConsequenceMode.TIERED) and failed:
        ledger.warnings_issued += 1
        return Action(ActionKind.WARN)

    if mode is ConsequenceMode.BONUS:
        amount = regular_bonus(image_count, ledger.running_avg, policy.t_bonus_b, policy)
        if amount > 0:
            ledger.bonuses_awarded.append((hit_id, amount))
            return Action(ActionKind.BONUS, bonus_cents=amount)

    if mode is ConsequenceMode.TIERED:
        tier = ledger.tier(policy)
        amount = 0
        if tier is Tier.A:
            amount = bonus_amount_for_count(image_count, policy)
        elif tier is Tier.B:
            amount = bonus_amount_for_count(image_count, policy) // 2
        if amount > 0:
            ledger.bonuses_awarded.append((hit_id, amount))
            return Action(ActionKind.BONUS, bonus_cents=amount)

    return Action(ActionKind.NONE)


@dataclass(frozen=True)
class BannerState:
    has_rating: bool
    running_avg: float
    tier: Tier | None
    message: str


def banner(ledger: WorkerLedger, policy: TierPolicy) -> BannerState:
    """Banner content shown to the worker, consistent with the ledger."""
    if not ledger.gold_scores:
        return BannerState(False, 0.0, None, "No quality rating yet")
    tier = ledger.tier(policy)
    avg = ledger.running_avg
    if ledger.blocked:
        msg = "Blocked: quality below threshold"
    elif tier is Tier.A:
        msg = f"Tier A: earning full bonuses. Keep your average above {policy.t_bonus_a:.0f}%"
    elif tier is Tier.B:
        msg = f"Tier B: reach {policy.t_bonus_a:.0f}% average for the full bonus"
    elif tier is Tier.STANDARD:
        msg = f"Reach {policy.t_bonus_b:.0f}% average to qualify for bonuses"
    else:
        msg = f"Warning: average below {policy.t_min:.0f}%. Improve to keep working"
    return BannerState(True, avg, tier, msg)
