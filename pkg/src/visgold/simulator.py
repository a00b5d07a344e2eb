"""Parametric stochastic annotators: the desk-scale stand-in for a crowd.

Each simulated worker draws boxes whose quality degrades with scene load
(object count) and object size, improves with visible-gold feedback, and
responds to warnings, tier banners and pay structure. The model is a
calibration device, not a cognitive theory: its defaults are tuned so the
baseline condition lands near its reference mean and the per-count quality
curves decline, and every other condition is an emergent prediction.

All randomness flows through numpy Generators seeded from the experiment
seed, so (seed, population, condition) fully determines every annotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import AnnotationSet, Scene
from .geometry import BoundingBox, clamp_box
from .ledger import BannerState, ConsequenceMode, Tier
from .payments import PaymentPolicy, PostTaskBonus, VariablePay, price
from .scoring import score
from .workflows import AddBoxes, Complete, Contribution, IterationState, SubTask

SPAM_MIOU_CEILING = 25.0  # spam submissions should land well under this


@dataclass(frozen=True)
class SimTuning:
    """Global behavioral constants shared by all workers.

    ``skill_shift`` and ``noise_scale`` are the main calibration handles;
    the rest shape condition-specific effects.
    """

    base_miss: float = 0.012  # per-box miss floor
    noise_scale: float = 0.30  # relative corner noise per unit (1 - skill)
    abs_floor_px: float = 1.1  # absolute corner noise floor, scaled by (1 - skill)
    skill_shift: float = 0.0  # additive shift applied to every worker's skill
    learn_headroom: float = 0.09  # upper skill potential above the innate level
    learning_decay: float = 0.02  # drift back toward innate skill per unreinforced HIT
    warn_error_factor: float = 0.96  # error multiplier per warning received
    warn_error_floor: float = 0.72
    tiered_care: float = 0.88  # transparency effect of the always-on tier banner
    tier_pressure_a: float = 0.97
    tier_pressure_b: float = 0.95
    tier_pressure_standard: float = 0.97
    tier_pressure_at_risk: float = 0.88
    post_bonus_distrust: float = 0.34  # extra miss probability at the top of the count range
    variable_pay_rush: float = 1.0  # error multiplier boost on low-pay items
    variable_pay_anchor_cents: int = 30
    subtask_context_noise: float = 2.2  # noise multiplier for decomposed sub-tasks
    iterate_noise: float = 1.2  # noise multiplier in iterative passes
    iterate_complete_base: float = 0.04  # premature-completion hazard, first pass
    iterate_complete_growth: float = 0.34  # growth per subsequent pass
    small_area_frac: float = 0.012  # boxes under this scene-area fraction read as small
    time_exponent: float = 0.75  # elapsed ~ speed * n^theta (per-box time shrinks with n)
    time_overhead_s: float = 14.0
    hazard_warning: float = 0.05  # per-warning abandonment hazard bump
    hazard_at_risk: float = 0.22
    hazard_low_pay: float = 0.08
    bonus_retention: float = 0.6  # hazard cut while earning tier bonuses
    fair_rate_cents_per_min: float = 10.0

    def tier_pressure(self, tier: Tier) -> float:
        return {
            Tier.A: self.tier_pressure_a,
            Tier.B: self.tier_pressure_b,
            Tier.STANDARD: self.tier_pressure_standard,
            Tier.AT_RISK: self.tier_pressure_at_risk,
        }[tier]


@dataclass
class SimWorker:
    """One parametric annotator. ``s_eff`` and ``gold_exposures`` track
    within-session adaptation; everything else is innate."""

    worker_id: str
    skill: float  # corner-placement precision in [0, 1]
    diligence: float  # per-box miss resistance in [0, 1]
    load_sensitivity: float  # degradation per extra object (gamma >= 0)
    small_object_penalty: float  # extra miss probability for small objects (beta >= 0)
    learn_rate: float  # response to gold feedback; 0 for spam
    dropout_propensity: float  # multiplier on abandonment hazards
    base_speed: float  # seconds per unit of work
    target_hits: int  # power-law participation draw
    spam: bool = False
    s_eff: float = field(init=False)
    gold_exposures: int = 0

    def __post_init__(self) -> None:
        if self.spam and self.learn_rate != 0.0:
            raise ValueError("spam workers ignore feedback (learn_rate must be 0)")
        for name in ("skill", "diligence", "learn_rate"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.load_sensitivity < 0 or self.small_object_penalty < 0:
            raise ValueError("sensitivity parameters must be >= 0")
        self.s_eff = self.skill

    def observe_gold_feedback(self, tuning: SimTuning) -> None:
        """Nudge effective skill toward its potential after seeing feedback."""
        self.gold_exposures += 1
        potential = min(1.0, self.skill + tuning.learn_headroom)
        self.s_eff += self.learn_rate * (potential - self.s_eff)

    def decay_learning(self, tuning: SimTuning) -> None:
        """Feedback effects fade when not reinforced."""
        if self.s_eff > self.skill:
            self.s_eff -= tuning.learning_decay * (self.s_eff - self.skill)


@dataclass(frozen=True)
class SimContext:
    """What the worker can see or feel at annotation time."""

    tuning: SimTuning = field(default_factory=SimTuning)
    payment: PaymentPolicy | None = None
    consequence_mode: ConsequenceMode = ConsequenceMode.NONE
    banner: BannerState | None = None
    warnings: int = 0
    blocked: bool = False
    pay_cents_so_far: int = 0
    seconds_so_far: float = 0.0
    subtask: bool = False
    iterative: bool = False


def _error_multiplier(worker: SimWorker, n: int, ctx: SimContext) -> float:
    """Multiplier on miss probability and corner noise; < 1 means extra care."""
    if worker.spam:
        return 1.0
    t = ctx.tuning
    mult = max(t.warn_error_floor, t.warn_error_factor**ctx.warnings)
    if ctx.consequence_mode is ConsequenceMode.TIERED:
        # the banner is always on display under the tiered interface
        mult *= t.tiered_care
        if ctx.banner and ctx.banner.has_rating and ctx.banner.tier is not None:
            mult *= t.tier_pressure(ctx.banner.tier)
    if isinstance(ctx.payment, VariablePay):
        advertised = price(ctx.payment, n)
        deficit = max(0, t.variable_pay_anchor_cents - advertised)
        mult *= 1.0 + t.variable_pay_rush * deficit / t.variable_pay_anchor_cents
    return mult


def _miss_probability(worker: SimWorker, n: int, area_frac: float, ctx: SimContext) -> float:
    t = ctx.tuning
    smallness = max(0.0, 1.0 - area_frac / t.small_area_frac)
    p = (
        t.base_miss
        + worker.load_sensitivity * (n - 1) * (1.0 - worker.diligence)
        + worker.small_object_penalty * smallness
    )
    if isinstance(ctx.payment, PostTaskBonus):
        # distrust of unguaranteed pay: effort collapses on high-count items
        p += t.post_bonus_distrust * (n - 1) / 13.0
    p *= _error_multiplier(worker, n, ctx)
    return min(max(p, 0.0), 0.95)


def _effective_skill(worker: SimWorker, ctx: SimContext) -> float:
    return min(1.0, max(0.0, worker.s_eff + ctx.tuning.skill_shift))


def _noisy_box(
    worker: SimWorker,
    gt: BoundingBox,
    n: int,
    ctx: SimContext,
    rng: np.random.Generator,
    scene: Scene,
) -> BoundingBox:
    t = ctx.tuning
    s = _effective_skill(worker, ctx)
    load_factor = 1.0 + worker.load_sensitivity * (n - 1)
    rel = t.noise_scale * (1.0 - s) * load_factor * _error_multiplier(worker, n, ctx)
    if ctx.subtask:
        rel *= t.subtask_context_noise
    if ctx.iterative:
        rel *= t.iterate_noise
    floor = t.abs_floor_px * (1.0 - s)
    sx = gt.w * rel + floor
    sy = gt.h * rel + floor
    if sx == 0.0 and sy == 0.0:
        return gt
    dx0, dx1, dy0, dy1 = rng.normal(0.0, 1.0, size=4)
    x0 = gt.x + dx0 * sx
    x1 = gt.right + dx1 * sx
    y0 = gt.y + dy0 * sy
    y1 = gt.bottom + dy1 * sy
    if x1 - x0 < 1.0:
        cx = (x0 + x1) / 2.0
        x0, x1 = cx - 0.5, cx + 0.5
    if y1 - y0 < 1.0:
        cy = (y0 + y1) / 2.0
        y0, y1 = cy - 0.5, cy + 0.5
    x0 = min(max(x0, 0.0), scene.width - 1.0)
    y0 = min(max(y0, 0.0), scene.height - 1.0)
    return clamp_box(BoundingBox(x0, y0, max(x1 - x0, 1.0), max(y1 - y0, 1.0)), scene.width, scene.height)


def _spam_boxes(scene: Scene, rng: np.random.Generator) -> list[BoundingBox]:
    boxes = []
    for _ in range(int(rng.integers(1, 5))):
        w = rng.uniform(0.05, 0.4) * scene.width
        h = rng.uniform(0.05, 0.4) * scene.height
        x = rng.uniform(0.0, scene.width - w)
        y = rng.uniform(0.0, scene.height - h)
        boxes.append(BoundingBox(x, y, w, h))
    return boxes


def _elapsed(worker: SimWorker, n_work: int, ctx: SimContext, rng: np.random.Generator) -> float:
    t = ctx.tuning
    base = t.time_overhead_s + worker.base_speed * max(n_work, 1) ** t.time_exponent
    return max(5.0, base * (1.0 + rng.normal(0.0, 0.12)))


def _nearest_gt(scene: Scene, mx: float, my: float) -> int:
    best, best_d = 0, math.inf
    for i, b in enumerate(scene.gt_boxes):
        cx, cy = b.center
        d = (cx - mx) ** 2 + (cy - my) ** 2
        if d < best_d:
            best, best_d = i, d
    return best


def simulate_hit(
    worker: SimWorker,
    task: Scene | SubTask,
    scene: Scene,
    ctx: SimContext,
    rng: np.random.Generator,
) -> AnnotationSet:
    """Produce one submission for a whole scene or a marked sub-task.

    Sub-task workers annotate the object nearest each marker under a
    reduced load but with extra context-loss noise; their residual miss
    rate is tiny since markers point straight at the targets. Spam workers
    emit uniform random boxes regardless of the task.
    """
    if worker.spam:
        boxes = _spam_boxes(scene, rng)
        return AnnotationSet(
            scene.scene_id, tuple(boxes), worker.worker_id, _elapsed(worker, len(boxes), ctx, rng)
        )

    scene_area = float(scene.width * scene.height)
    if isinstance(task, SubTask):
        targets = [_nearest_gt(scene, mx, my) for mx, my in task.markers]
        n_load = len(task.markers)
        ctx = replace(ctx, subtask=True)
    else:
        targets = list(range(len(scene.gt_boxes)))
        n_load = scene.count

    boxes: list[BoundingBox] = []
    for gt_idx in targets:
        gt = scene.gt_boxes[gt_idx]
        p_miss = _miss_probability(worker, n_load, gt.area / scene_area, ctx)
        if isinstance(task, SubTask):
            p_miss = min(p_miss * 0.2, 0.95)
        if rng.random() < p_miss:
            continue
        boxes.append(_noisy_box(worker, gt, n_load, ctx, rng, scene))
    elapsed = _elapsed(worker, max(len(boxes), 1), ctx, rng)
    return AnnotationSet(scene.scene_id, tuple(boxes), worker.worker_id, elapsed)


def simulate_iteration(
    worker: SimWorker,
    state: IterationState,
    scene: Scene,
    ctx: SimContext,
    rng: np.random.Generator,
) -> tuple[Contribution, float]:
    """One pass of the iterative workflow: add up to three boxes around
    objects not yet covered, or declare the task complete.

    Premature completion becomes more likely the longer the chain runs,
    mirroring workers confusing later passes with verification jobs.
    """
    ctx = replace(ctx, iterative=True)
    t = ctx.tuning
    covered = AnnotationSet(scene.scene_id, tuple(b for b, _ in state.boxes), worker.worker_id, 0.0)
    uncovered = (
        list(score(scene, covered).match.unmatched_gt) if state.boxes else list(range(scene.count))
    )
    p_complete = min(0.9, t.iterate_complete_base + t.iterate_complete_growth * state.iteration_index)
    if not uncovered or rng.random() < p_complete:
        return Complete(worker.worker_id), _elapsed(worker, 1, ctx, rng)

    scene_area = float(scene.width * scene.height)
    picked: list[BoundingBox] = []
    for gt_idx in uncovered[:3]:
        gt = scene.gt_boxes[gt_idx]
        p_miss = _miss_probability(worker, min(len(uncovered), 3), gt.area / scene_area, ctx)
        if rng.random() < p_miss:
            continue
        picked.append(_noisy_box(worker, gt, min(len(uncovered), 3), ctx, rng, scene))
    elapsed = _elapsed(worker, max(len(picked), 1), ctx, rng)
    if not picked:
        return Complete(worker.worker_id), elapsed
    return AddBoxes(tuple(picked), worker.worker_id), elapsed


def abandon_hazard(worker: SimWorker, ctx: SimContext) -> float:
    """Per-HIT probability that the worker walks away after this submission."""
    if ctx.blocked:
        return 1.0
    t = ctx.tuning
    h = t.hazard_warning * ctx.warnings
    if ctx.banner and ctx.banner.has_rating and ctx.banner.tier is Tier.AT_RISK:
        h += t.hazard_at_risk
    if ctx.seconds_so_far > 0:
        rate = ctx.pay_cents_so_far / (ctx.seconds_so_far / 60.0)
        if rate < t.fair_rate_cents_per_min:
            h += t.hazard_low_pay * (1.0 - rate / t.fair_rate_cents_per_min)
    if (
        ctx.consequence_mode is ConsequenceMode.TIERED
        and ctx.banner
        and ctx.banner.tier in (Tier.A, Tier.B)
    ):
        # bonus earnings keep good workers around
        h *= 1.0 - t.bonus_retention
    return min(1.0, h * worker.dropout_propensity)


def decide_continue(worker: SimWorker, ctx: SimContext, rng: np.random.Generator) -> bool:
    """True to keep working, False to abandon the task queue."""
    return rng.random() >= abandon_hazard(worker, ctx)


@dataclass(frozen=True)
class PopulationSpec:
    size: int = 30
    spam_rate: float = 0.06
    participation_exponent: float = 1.5  # Pareto tail index for HITs per worker
    participation_scale: float = 6.0
    max_target_hits: int = 80


@dataclass
class SimPopulation:
    """Deterministic worker factory; replacement draws extend the roster."""

    seed: int
    spec: PopulationSpec = field(default_factory=PopulationSpec)
    _workers: list[SimWorker] = field(default_factory=list, init=False, repr=False)

    def worker(self, index: int) -> SimWorker:
        while len(self._workers) <= index:
            self._workers.append(self._draw(len(self._workers)))
        return self._workers[index]

    def initial_roster(self) -> list[SimWorker]:
        return [self.worker(i) for i in range(self.spec.size)]

    def _draw(self, index: int) -> SimWorker:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0x9A11ED, index]))
        spam = bool(rng.random() < self.spec.spam_rate)
        raw_target = self.spec.participation_scale * (rng.pareto(self.spec.participation_exponent) + 1.0)
        target = int(min(self.spec.max_target_hits, max(1, round(raw_target))))
        if spam:
            target = max(target, 8)
        return SimWorker(
            worker_id=f"w{index:04d}",
            skill=float(rng.beta(6.0, 2.2)),
            diligence=float(rng.beta(7.0, 2.5)),
            load_sensitivity=float(rng.uniform(0.025, 0.055)),
            small_object_penalty=float(rng.uniform(0.05, 0.12)),
            learn_rate=0.0 if spam else float(rng.uniform(0.25, 0.55)),
            dropout_propensity=float(rng.uniform(0.5, 1.5)),
            base_speed=float(rng.lognormal(math.log(44.0), 0.25)),
            target_hits=target,
            spam=spam,
        )
