"""Visible-gold issuance policies and per-worker schedule state.

Four issuance patterns are supported:

* Upfront(k): the first k HITs are gold.
* Regular(block): one gold per consecutive block of ``block`` HITs, at a
  position drawn uniformly per block from the worker's seeded stream so
  workers cannot anticipate it.
* FibRegular(fib_cutoff, tail_block): gold at every Fibonacci ordinal
  (1, 2, 3, 5, 8, 13, ...) up to the cutoff, then one gold per block of
  ``tail_block`` HITs at a seeded in-block position.
* Dynamic(base, t_min): the base pattern, except a failed gold forces the
  next HIT to be gold until the worker passes one or gets blocked.

In-block gold positions derive from (rng_seed, worker_id, block_index)
only, so schedules are reproducible regardless of query order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class HitKind(str, Enum):
    GOLD = "gold"
    STANDARD = "standard"


class GoldOutcome(str, Enum):
    CONTINUE = "continue"
    BLOCK = "block"


@dataclass(frozen=True)
class NoGold:
    """Issuance pattern that never serves a gold (baseline conditions)."""


@dataclass(frozen=True)
class Upfront:
    k: int = 5

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be >= 0")


@dataclass(frozen=True)
class Regular:
    block: int = 5

    def __post_init__(self) -> None:
        if self.block < 2:
            raise ValueError("block must be >= 2")


@dataclass(frozen=True)
class FibRegular:
    fib_cutoff: int = 50
    tail_block: int = 20

    def __post_init__(self) -> None:
        if self.fib_cutoff < 1:
            raise ValueError("fib_cutoff must be >= 1")
        if self.tail_block < 2:
            raise ValueError("tail_block must be >= 2")


@dataclass(frozen=True)
class Dynamic:
    base: FibRegular = field(default_factory=FibRegular)
    t_min: float = 50.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.t_min <= 100.0):
            raise ValueError("t_min must be in [0, 100]")


PatternKind = NoGold | Upfront | Regular | FibRegular | Dynamic


@dataclass(frozen=True)
class SchedulePolicy:
    kind: PatternKind
    rng_seed: int = 0


@dataclass
class ScheduleState:
    """Mutable per-worker schedule progress. ``hit_ordinal`` is the 1-based
    ordinal of the next HIT to be issued."""

    worker_id: str
    hit_ordinal: int = 1
    override_active: bool = False
    consecutive_gold_failures: int = 0
    golds_issued: int = 0
    last_issued: HitKind | None = None


def fibonacci_ordinals(cutoff: int) -> tuple[int, ...]:
    """Deduplicated Fibonacci numbers up to and including ``cutoff``."""
    out: list[int] = []
    a, b = 1, 2
    while a <= cutoff:
        out.append(a)
        a, b = b, a + b
    return tuple(out)


def _block_gold_position(seed: int, worker_id: str, namespace: str, block_index: int, block: int) -> int:
    """Uniform in-block gold offset in [1, block], stable per (seed, worker, block)."""
    digest = hashlib.blake2b(
        f"{namespace}:{worker_id}:{block_index}".encode(), digest_size=8
    ).digest()
    stream = np.random.default_rng(
        np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, int.from_bytes(digest, "big")])
    )
    return int(stream.integers(1, block + 1))


def _pattern_is_gold(kind: PatternKind, policy: SchedulePolicy, worker_id: str, ordinal: int) -> bool:
    if isinstance(kind, NoGold):
        return False
    if isinstance(kind, Upfront):
        return ordinal <= kind.k
    if isinstance(kind, Regular):
        block_index = (ordinal - 1) // kind.block
        pos = _block_gold_position(policy.rng_seed, worker_id, "regular", block_index, kind.block)
        return (ordinal - 1) % kind.block + 1 == pos
    if isinstance(kind, FibRegular):
        if ordinal <= kind.fib_cutoff:
            return ordinal in fibonacci_ordinals(kind.fib_cutoff)
        block_index = (ordinal - kind.fib_cutoff - 1) // kind.tail_block
        pos = _block_gold_position(
            policy.rng_seed, worker_id, "fib-tail", block_index, kind.tail_block
        )
        return (ordinal - kind.fib_cutoff - 1) % kind.tail_block + 1 == pos
    if isinstance(kind, Dynamic):
        return _pattern_is_gold(kind.base, policy, worker_id, ordinal)
    raise TypeError(f"unknown pattern kind: {kind!r}")


def next_hit_kind(policy: SchedulePolicy, state: ScheduleState) -> HitKind:
    """Decide whether the worker's next HIT is gold. Pure: repeated calls
    on the same state return the same answer."""
    if isinstance(policy.kind, Dynamic) and state.override_active:
        return HitKind.GOLD
    if _pattern_is_gold(policy.kind, policy, state.worker_id, state.hit_ordinal):
        return HitKind.GOLD
    return HitKind.STANDARD


def advance(state: ScheduleState, kind: HitKind) -> None:
    """Mark one HIT of the given kind as completed, advancing the ordinal."""
    state.hit_ordinal += 1
    state.last_issued = kind
    if kind is HitKind.GOLD:
        state.golds_issued += 1


def record_gold_outcome(
    policy: SchedulePolicy,
    state: ScheduleState,
    image_miou: float,
    running_avg: float,
    t_min: float | None = None,
) -> GoldOutcome:
    """Update failure tracking after a completed gold and decide blocking.

    ``running_avg`` is the worker's average gold accuracy including this
    gold (owned by the consequence ledger). Pass/fail compares the image
    mIoU against ``t_min`` (defaulting to the Dynamic policy's threshold).
    Blocking requires a third consecutive failure with the running average
    below the threshold, and only Dynamic policies block; other patterns
    carry warnings instead.
    """
    if state.last_issued is not HitKind.GOLD:
        raise ValueError("record_gold_outcome called but the last HIT was not gold")
    if t_min is None:
        if not isinstance(policy.kind, Dynamic):
            raise ValueError("t_min required for non-Dynamic policies")
        t_min = policy.kind.t_min

    if image_miou >= t_min:
        state.consecutive_gold_failures = 0
        state.override_active = False
        return GoldOutcome.CONTINUE

    state.consecutive_gold_failures += 1
    if not isinstance(policy.kind, Dynamic):
        return GoldOutcome.CONTINUE
    state.override_active = True
    if state.consecutive_gold_failures >= 3 and running_avg < t_min:
        return GoldOutcome.BLOCK
    return GoldOutcome.CONTINUE
